#include "sid/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "sid/errors.hpp"
#include "sid/fluid.hpp"
#include "sid/parallel.hpp"

namespace sid {

std::vector<InvariantStats> conservation_stats(const Trajectory& traj, const Matrix& thetas,
                                               const MonomialBasis& basis,
                                               const DynamicalSystem* system) {
    if (traj.states.cols() != basis.dimension()) {
        throw DimensionError("trajectory and basis dimensions differ");
    }
    if (thetas.rows() != static_cast<Eigen::Index>(basis.size())) {
        throw DimensionError("coefficient matrix does not match the basis");
    }
    const Eigen::Index t_count = traj.states.rows();
    Matrix h(t_count, thetas.cols());
    for (Eigen::Index t = 0; t < t_count; ++t) {
        Vector x = traj.states.row(t).transpose();
        if (system) {
            x = system->observed_state(x);
        }
        h.row(t) = (basis.evaluate(x).transpose() * thetas);
    }
    std::vector<InvariantStats> out;
    for (Eigen::Index j = 0; j < thetas.cols(); ++j) {
        InvariantStats s;
        s.mean = h.col(j).mean();
        const double var = t_count > 0 ? (h.col(j).array() - s.mean).square().mean() : 0.0;
        s.stddev = std::sqrt(var);
        s.absolute = std::abs(s.mean) < kNearZeroMean;
        s.cv = s.absolute ? s.stddev : s.stddev / std::abs(s.mean);
        out.push_back(s);
    }
    return out;
}

Trajectory simulate(const DynamicalSystem& system, const Vector& x0, double t_end,
                    std::size_t points, const IntegratorOptions& opts) {
    if (x0.size() != system.dimension()) {
        throw DimensionError("initial state has the wrong dimension for " + system.name());
    }
    Trajectory traj = integrate([&](const Vector& x) { return system.field(x); }, x0,
                                uniform_times(t_end, points), opts);
    traj.system = system.name();
    return traj;
}

Trajectory simulate(const DynamicalSystem& system, const Vector& x0, double t_end,
                    std::size_t points) {
    return simulate(system, x0, t_end, points, system.integrator_options());
}

bool MonteCarloResult::all_passed(double required_fraction) const {
    return completed() > 0 && std::all_of(pass_fraction.begin(), pass_fraction.end(),
                                          [&](double f) { return f >= required_fraction; });
}

MonteCarloResult monte_carlo_validate(const DynamicalSystem& system, const Matrix& thetas,
                                      const MonomialBasis& basis,
                                      const std::vector<std::string>& labels,
                                      const std::vector<double>& thresholds,
                                      const MonteCarloOptions& opts) {
    const auto m = static_cast<std::size_t>(thetas.cols());
    if (labels.size() != m || thresholds.size() != m) {
        throw DimensionError("one label and one threshold per invariant are required");
    }
    if (opts.n_cases < 1) {
        throw DomainError("n_cases must be at least 1");
    }
    const double horizon = opts.horizon > 0.0 ? opts.horizon : system.default_horizon();

    MonteCarloResult out;
    out.labels = labels;
    out.thresholds = thresholds;
    out.stats.assign(opts.n_cases, {});
    std::vector<std::string> errors(opts.n_cases);
    parallel_for(opts.n_cases, [&](std::size_t i) {
        std::seed_seq seq{static_cast<std::uint32_t>(opts.seed),
                          static_cast<std::uint32_t>(opts.seed >> 32),
                          static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32)};
        std::mt19937_64 rng(seq);
        try {
            const Vector x0 = system.random_initial_state(rng);
            const Trajectory traj = simulate(system, x0, horizon, opts.points);
            out.stats[i] = conservation_stats(traj, thetas, basis, &system);
        } catch (const Error& e) {
            errors[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < opts.n_cases; ++i) {
        if (out.stats[i].empty()) {
            out.failures.push_back({i, errors[i]});
        }
    }

    for (std::size_t j = 0; j < m; ++j) {
        std::vector<double> cvs;
        std::size_t pass = 0;
        for (const auto& row : out.stats) {
            if (row.empty()) {
                continue;
            }
            cvs.push_back(row[j].cv);
            if (row[j].cv < thresholds[j]) {
                ++pass;
            }
        }
        if (cvs.empty()) {
            out.pass_fraction.push_back(0.0);
            out.max_cv.push_back(std::numeric_limits<double>::quiet_NaN());
            out.p95_cv.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        out.pass_fraction.push_back(static_cast<double>(pass) / static_cast<double>(cvs.size()));
        std::sort(cvs.begin(), cvs.end());
        out.max_cv.push_back(cvs.back());
        // Nearest-rank percentile.
        const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(cvs.size())));
        out.p95_cv.push_back(cvs[std::max<std::size_t>(rank, 1) - 1]);
    }
    return out;
}

FluidIdentityResult fluid_identity_check(std::size_t n_states, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto draw = [&](int d) {
        Vector v(d);
        for (int i = 0; i < d; ++i) {
            v[i] = normal(rng);
        }
        return v;
    };

    std::map<std::string, Polynomial> q2;
    for (auto& q : fluid::quantities_2d()) {
        q2.emplace(q.name, std::move(q.poly));
    }
    std::map<std::string, Polynomial> q3;
    for (auto& q : fluid::quantities_3d()) {
        q3.emplace(q.name, std::move(q.poly));
    }

    FluidIdentityResult out;
    for (std::size_t n = 0; n < n_states; ++n) {
        const Vector s2 = draw(fluid::kDim2);
        auto v2 = [&](const char* name) { return q2.at(name).evaluate(s2); };
        const double ik = v2("I") * v2("K");
        const double ea = v2("E") * v2("A");
        const double lw = v2("L") * v2("omega");
        const double dg = v2("D") * v2("G");
        const double scale2 = std::abs(ik) + std::abs(ea) + std::abs(lw) + std::abs(dg);
        if (scale2 > 0.0) {
            out.literal_2d = std::max(out.literal_2d, std::abs(ik - (ea - lw - dg)) / scale2);
            out.corrected_2d = std::max(out.corrected_2d, std::abs(ik + (ea - lw - dg)) / scale2);
        }

        const Vector s3 = draw(fluid::kDim3);
        auto v3 = [&](const std::string& name) { return q3.at(name).evaluate(s3); };
        double csum = 0.0;
        double cabs = 0.0;
        for (int i = 1; i <= 4; ++i) {
            const double c = v3("C" + std::to_string(i));
            csum += c;
            cabs += std::abs(c);
        }
        if (cabs > 0.0) {
            out.circulation_3d = std::max(out.circulation_3d, std::abs(csum) / cabs);
        }
        const double tx = v3("u_cm") * v3("Lcm_x");
        const double ty = v3("v_cm") * v3("Lcm_y");
        const double tz = v3("w_cm") * v3("Lcm_z");
        const double scale3 = std::abs(tx) + std::abs(ty) + std::abs(tz);
        if (scale3 > 0.0) {
            out.com_angular_3d = std::max(out.com_angular_3d, std::abs(tx + ty + tz) / scale3);
        }
    }
    return out;
}

}  // namespace sid
