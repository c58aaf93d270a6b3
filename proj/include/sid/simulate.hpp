#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sid/integrate.hpp"
#include "sid/polybasis.hpp"
#include "sid/systems.hpp"
#include "sid/types.hpp"

namespace sid {

/// Means below this magnitude switch the CV to an absolute standard deviation.
inline constexpr double kNearZeroMean = 1e-12;

struct InvariantStats {
    double mean = 0.0;
    double stddev = 0.0;
    /// stddev / |mean|, or stddev itself when `absolute` is set.
    double cv = 0.0;
    bool absolute = false;
};

/// Statistics of H_theta(x_t) = theta . b(x_t) along one trajectory, one entry
/// per column of `thetas`. States are mapped through the system's
/// observed_state() when a system is given.
std::vector<InvariantStats> conservation_stats(const Trajectory& traj, const Matrix& thetas,
                                               const MonomialBasis& basis,
                                               const DynamicalSystem* system = nullptr);

/// Integrates `system` from x0 over [0, t_end], recording `points` states.
Trajectory simulate(const DynamicalSystem& system, const Vector& x0, double t_end,
                    std::size_t points = 200);
Trajectory simulate(const DynamicalSystem& system, const Vector& x0, double t_end,
                    std::size_t points, const IntegratorOptions& opts);

struct MonteCarloOptions {
    std::size_t n_cases = 100;
    std::uint64_t seed = 0;
    double horizon = 0.0;  // 0: the system default
    std::size_t points = 200;
};

struct CaseFailure {
    std::size_t index;
    std::string message;
};

struct MonteCarloResult {
    std::vector<std::string> labels;
    std::vector<double> thresholds;
    /// stats[case][invariant]; failed cases hold an empty row.
    std::vector<std::vector<InvariantStats>> stats;
    std::vector<CaseFailure> failures;
    std::vector<double> pass_fraction;  // over successful cases
    std::vector<double> max_cv;
    std::vector<double> p95_cv;

    std::size_t completed() const { return stats.size() - failures.size(); }
    bool all_passed(double required_fraction = 1.0) const;
};

/// Random initial conditions, one trajectory per case, CV per invariant.
/// Case i draws from its own generator seeded by (seed, i), so results do not
/// depend on the thread count. An invariant passes a case when its CV is
/// below its threshold.
MonteCarloResult monte_carlo_validate(const DynamicalSystem& system, const Matrix& thetas,
                                      const MonomialBasis& basis,
                                      const std::vector<std::string>& labels,
                                      const std::vector<double>& thresholds,
                                      const MonteCarloOptions& opts = {});

struct FluidIdentityResult {
    /// |IK - (EA - L omega - DG)|, relative to the sum of term magnitudes.
    double literal_2d = 0.0;
    /// Same with the sign of IK flipped: |IK + (EA - L omega - DG)|.
    double corrected_2d = 0.0;
    /// |C1 + C2 + C3 + C4| relative to sum |C_i|.
    double circulation_3d = 0.0;
    /// |u_cm Lcm_x + v_cm Lcm_y + w_cm Lcm_z| relative.
    double com_angular_3d = 0.0;
};

/// Maximum relative residuals over n_states Gaussian 2D and 3D states.
FluidIdentityResult fluid_identity_check(std::size_t n_states, std::uint64_t seed);

}  // namespace sid
