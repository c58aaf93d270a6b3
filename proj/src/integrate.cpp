#include "sid/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "sid/errors.hpp"

namespace sid {

std::string to_string(Method m) { return m == Method::RK4 ? "rk4" : "rk45"; }

Method method_from_string(const std::string& s) {
    if (s == "rk4") {
        return Method::RK4;
    }
    if (s == "rk45") {
        return Method::RK45;
    }
    throw ConfigError("unknown integration method '" + s + "' (expected rk4 or rk45)");
}

std::vector<double> uniform_times(double t_end, std::size_t n) {
    if (n < 2 || !(t_end > 0.0)) {
        throw DomainError("uniform_times needs t_end > 0 and at least two points");
    }
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) {
        t[i] = t_end * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return t;
}

namespace {

bool all_finite(const Vector& v) { return v.allFinite(); }

class Stepper {
public:
    Stepper(const VectorField& f, const IntegratorOptions& o) : f_(f), o_(o) {}

    Vector eval(const Vector& x) const {
        if (o_.nonnegative) {
            return f_(x.cwiseMax(0.0));
        }
        return f_(x);
    }

    Vector rk4(const Vector& x, double h) const {
        const Vector k1 = eval(x);
        const Vector k2 = eval(x + 0.5 * h * k1);
        const Vector k3 = eval(x + 0.5 * h * k2);
        const Vector k4 = eval(x + h * k3);
        return x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    // Dormand-Prince 5(4): returns the 5th-order solution, the error estimate
    // and the derivative at the new point.
    Vector dopri(const Vector& x, double h, const Vector& k1, Vector& err, Vector& k7) const {
        constexpr double a21 = 1.0 / 5;
        constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                         a54 = -212.0 / 729;
        constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                         a64 = 49.0 / 176, a65 = -5103.0 / 18656;
        constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                         b5 = -2187.0 / 6784, b6 = 11.0 / 84;
        constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                         e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
        const Vector k2 = eval(x + h * a21 * k1);
        const Vector k3 = eval(x + h * (a31 * k1 + a32 * k2));
        const Vector k4 = eval(x + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const Vector k5 = eval(x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Vector k6 = eval(x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        Vector y = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        k7 = eval(o_.nonnegative ? Vector(y.cwiseMax(0.0)) : y);
        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        return y;
    }

private:
    const VectorField& f_;
    const IntegratorOptions& o_;
};

}  // namespace

Trajectory integrate(const VectorField& f, const Vector& x0, const std::vector<double>& times,
                     const IntegratorOptions& opts) {
    if (times.empty()) {
        throw DomainError("integrate needs at least one output time");
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) {
            throw DomainError("output times must be strictly increasing");
        }
    }
    if (!all_finite(x0)) {
        throw IntegrationError("initial state is not finite", times.front());
    }

    Trajectory traj;
    traj.times = times;
    traj.method = to_string(opts.method);
    traj.states.resize(static_cast<Eigen::Index>(times.size()), x0.size());
    Vector x = opts.nonnegative ? Vector(x0.cwiseMax(0.0)) : x0;
    traj.states.row(0) = x.transpose();

    const Stepper stepper(f, opts);
    double t = times.front();
    std::size_t steps = 0;

    if (opts.method == Method::RK4) {
        if (!(opts.step > 0.0)) {
            throw DomainError("RK4 step must be positive");
        }
        for (std::size_t i = 1; i < times.size(); ++i) {
            while (t < times[i]) {
                const double h = std::min(opts.step, times[i] - t);
                // Avoid a sliver step caused by rounding.
                const bool last = times[i] - t - h < 1e-12 * std::max(1.0, std::abs(t));
                x = stepper.rk4(x, last ? times[i] - t : h);
                if (opts.nonnegative) {
                    x = x.cwiseMax(0.0);
                }
                t = last ? times[i] : t + h;
                if (!all_finite(x)) {
                    throw IntegrationError("state became non-finite", t);
                }
                if (++steps > opts.max_steps) {
                    throw IntegrationError("step limit exceeded", t);
                }
            }
            traj.states.row(static_cast<Eigen::Index>(i)) = x.transpose();
        }
        traj.steps_accepted = steps;
        return traj;
    }

    Vector k1 = stepper.eval(x);
    const double span = times.back() - times.front();
    double h = opts.step > 0.0 ? opts.step : span * 1e-3;
    if (span > 0.0) {
        // Initial step from the derivative scale.
        const Vector scale = (opts.atol + opts.rtol * x.array().abs()).matrix();
        const double d0 = (x.array() / scale.array()).matrix().norm() / std::sqrt(x.size());
        const double d1 = (k1.array() / scale.array()).matrix().norm() / std::sqrt(x.size());
        if (d0 > 1e-5 && d1 > 1e-5) {
            h = std::min(h, 0.01 * d0 / d1);
        }
    }
    Vector err, k7;
    for (std::size_t i = 1; i < times.size(); ++i) {
        while (t < times[i]) {
            const double remaining = times[i] - t;
            bool hits = false;
            double step = h;
            if (step >= remaining) {
                step = remaining;
                hits = true;
            }
            if (step < opts.min_step * std::max(1.0, std::abs(t))) {
                throw IntegrationError("step size underflow (stiff or singular system)", t);
            }
            Vector y = stepper.dopri(x, step, k1, err, k7);
            const Vector scale =
                (opts.atol + opts.rtol * x.array().abs().max(y.array().abs())).matrix();
            double e = (err.array() / scale.array()).matrix().norm() /
                       std::sqrt(static_cast<double>(x.size()));
            bool ok = std::isfinite(e) && e <= 1.0 && all_finite(y);
            if (ok && opts.nonnegative && y.minCoeff() < -opts.negative_tolerance) {
                ok = false;
                e = std::max(e, 4.0);
            }
            if (++steps > opts.max_steps) {
                throw IntegrationError("step limit exceeded", t);
            }
            if (ok) {
                t = hits ? times[i] : t + step;
                x = opts.nonnegative ? Vector(y.cwiseMax(0.0)) : y;
                k1 = opts.nonnegative ? stepper.eval(x) : k7;
                ++traj.steps_accepted;
                const double factor = e > 0.0 ? 0.9 * std::pow(e, -0.2) : 5.0;
                // A step shortened to land on an output time says little
                // about the next one; keep the previous trial step then.
                if (!(hits && step < h)) {
                    h = step * std::clamp(factor, 0.2, 5.0);
                }
            } else {
                ++traj.steps_rejected;
                const double factor = std::isfinite(e) ? 0.9 * std::pow(e, -0.25) : 0.1;
                h = step * std::clamp(factor, 0.1, 0.5);
            }
        }
        traj.states.row(static_cast<Eigen::Index>(i)) = x.transpose();
    }
    return traj;
}

void write_trajectory_csv(const Trajectory& traj, const std::vector<std::string>& names,
                          const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open " + path + " for writing");
    }
    out.imbue(std::locale::classic());
    out << "t";
    for (const auto& n : names) {
        out << ',' << n;
    }
    out << '\n' << std::setprecision(17);
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        out << traj.times[i];
        for (Eigen::Index j = 0; j < traj.states.cols(); ++j) {
            out << ',' << traj.states(static_cast<Eigen::Index>(i), j);
        }
        out << '\n';
    }
    if (!out) {
        throw IoError("failed while writing " + path);
    }
}

}  // namespace sid
