#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "sid/types.hpp"

namespace sid {

using VectorField = std::function<Vector(const Vector&)>;

enum class Method { RK4, RK45 };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct IntegratorOptions {
    Method method = Method::RK45;
    double rtol = 1e-10;
    double atol = 1e-12;
    /// RK4 step; also the first trial step for RK45 (0 = automatic).
    double step = 1e-3;
    double min_step = 1e-14;
    std::size_t max_steps = 5'000'000;
    /// Clip stage arguments and accepted states at zero; reject steps that
    /// undershoot by more than `negative_tolerance`.
    bool nonnegative = false;
    double negative_tolerance = 1e-10;
};

struct Trajectory {
    std::vector<double> times;
    Matrix states;  // one row per time
    std::string system;
    std::string method;
    std::size_t steps_accepted = 0;
    std::size_t steps_rejected = 0;
};

/// Integrates from times.front() and records the state at every entry of
/// `times` (strictly increasing). Throws IntegrationError on step-size
/// underflow, non-finite states or too many steps.
Trajectory integrate(const VectorField& f, const Vector& x0, const std::vector<double>& times,
                     const IntegratorOptions& opts = {});

/// `n` equally spaced times on [0, t_end], both ends included.
std::vector<double> uniform_times(double t_end, std::size_t n);

/// Writes "t,x1,...,xd" rows.
void write_trajectory_csv(const Trajectory& traj, const std::vector<std::string>& names,
                          const std::string& path);

}  // namespace sid
