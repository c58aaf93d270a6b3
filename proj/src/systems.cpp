#include "sid/systems.hpp"

#include <algorithm>
#include <cmath>

#include "sid/errors.hpp"
#include "sid/fluid.hpp"

namespace sid {

std::size_t DynamicalSystem::default_sample_count(std::size_t basis_size) const {
    return std::max<std::size_t>(2 * basis_size, 100);
}

Vector lotka_volterra_field(const Vector& x) {
    if (x.size() != 3) {
        throw DimensionError("Lotka-Volterra state has 3 entries");
    }
    return Vector{{x[0] * (x[1] - x[2]), x[1] * (x[2] - x[0]), x[2] * (x[0] - x[1])}};
}

Vector harmonic_field(const Vector& x) {
    if (x.size() != 2) {
        throw DimensionError("harmonic oscillator state has 2 entries");
    }
    return Vector{{x[1], -x[0]}};
}

Matrix evaluate_field(const DynamicalSystem& system, const Matrix& points) {
    Matrix out(points.rows(), points.cols());
    for (Eigen::Index p = 0; p < points.rows(); ++p) {
        try {
            out.row(p) = system.field(points.row(p).transpose()).transpose();
        } catch (const Error& e) {
            throw Error("field evaluation failed at sample " + std::to_string(p) + ": " + e.what());
        }
    }
    return out;
}

namespace {

Matrix gaussian_matrix(std::size_t rows, int cols, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix m(static_cast<Eigen::Index>(rows), cols);
    // Row-major fill so sample p depends only on the first p draws.
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            m(r, c) = n(rng);
        }
    }
    return m;
}

Vector gaussian_vector(int d, std::mt19937_64& rng) {
    return gaussian_matrix(1, d, rng).row(0).transpose();
}

Polynomial var(int d, int i) { return Polynomial::variable(d, i); }

// ---- Lotka-Volterra and harmonic oscillator ---------------------------------

class LotkaVolterra final : public DynamicalSystem {
public:
    std::string name() const override { return "lv3"; }
    std::string description() const override { return "three-species Lotka-Volterra"; }
    int dimension() const override { return 3; }
    std::vector<std::string> variable_names() const override { return {"x", "y", "z"}; }
    Vector field(const Vector& x) const override { return lotka_volterra_field(x); }

    Matrix sample_states(std::size_t count, std::uint64_t seed) const override {
        std::mt19937_64 rng(seed);
        return gaussian_matrix(count, 3, rng);
    }

    // Positive starting points stay on bounded closed orbits.
    Vector random_initial_state(std::mt19937_64& rng) const override {
        std::uniform_real_distribution<double> u(0.5, 2.0);
        Vector x(3);
        for (int i = 0; i < 3; ++i) {
            x[i] = u(rng);
        }
        return x;
    }

    std::vector<KnownQuantity> known_quantities() const override {
        return {{"x + y + z", var(3, 0) + var(3, 1) + var(3, 2)},
                {"xyz", var(3, 0) * var(3, 1) * var(3, 2)}};
    }

    double default_horizon() const override { return 10.0; }
};

class Harmonic final : public DynamicalSystem {
public:
    std::string name() const override { return "harmonic"; }
    std::string description() const override { return "1D harmonic oscillator"; }
    int dimension() const override { return 2; }
    std::vector<std::string> variable_names() const override { return {"x", "p"}; }
    Vector field(const Vector& x) const override { return harmonic_field(x); }

    Matrix sample_states(std::size_t count, std::uint64_t seed) const override {
        std::mt19937_64 rng(seed);
        return gaussian_matrix(count, 2, rng);
    }

    Vector random_initial_state(std::mt19937_64& rng) const override {
        return gaussian_vector(2, rng);
    }

    std::vector<KnownQuantity> known_quantities() const override {
        return {{"x^2 + p^2", var(2, 0) * var(2, 0) + var(2, 1) * var(2, 1)}};
    }

    double default_horizon() const override { return 10.0; }
};

// ---- fluid elements ---------------------------------------------------------

class FluidElement final : public DynamicalSystem {
public:
    explicit FluidElement(bool three_d) : three_d_(three_d) {}

    std::string name() const override { return three_d_ ? "fluid3d" : "fluid2d"; }
    std::string description() const override {
        return three_d_ ? "incompressible tetrahedral fluid element"
                        : "incompressible triangular fluid element";
    }
    int dimension() const override { return three_d_ ? fluid::kDim3 : fluid::kDim2; }
    std::vector<std::string> variable_names() const override {
        return three_d_ ? fluid::variable_names_3d() : fluid::variable_names_2d();
    }
    Vector field(const Vector& x) const override {
        return three_d_ ? fluid::field_3d(x) : fluid::field_2d(x);
    }

    // Gaussian draws projected onto dA/dt = 0 (dV/dt = 0); draws whose
    // multiplier denominator is numerically zero are resampled.
    Matrix sample_states(std::size_t count, std::uint64_t seed) const override {
        std::mt19937_64 rng(seed);
        Matrix out(static_cast<Eigen::Index>(count), dimension());
        std::size_t rejected = 0;
        for (std::size_t i = 0; i < count;) {
            if (auto s = draw(rng)) {
                out.row(static_cast<Eigen::Index>(i++)) = s->transpose();
            } else if (++rejected > std::max<std::size_t>(count, 1)) {
                throw SamplerError(name() + " sampler rejected more than half of its draws");
            }
        }
        return out;
    }

    Vector random_initial_state(std::mt19937_64& rng) const override {
        for (int attempt = 0; attempt < 100; ++attempt) {
            if (auto s = draw(rng)) {
                return *s;
            }
        }
        throw SamplerError(name() + " could not draw a non-degenerate state");
    }

    std::vector<KnownQuantity> known_quantities() const override {
        std::vector<KnownQuantity> out;
        if (three_d_) {
            for (auto& q : fluid::quantities_3d()) {
                out.push_back({q.name, std::move(q.poly)});
            }
            return out;
        }
        const auto all = fluid::quantities_2d();
        auto find = [&](const std::string& n) {
            return std::find_if(all.begin(), all.end(), [&](const auto& q) { return q.name == n; })
                ->poly;
        };
        for (const char* n : {"u_cm", "v_cm", "L_cm", "L", "E", "A", "D", "omega"}) {
            out.push_back({n, find(n)});
        }
        out.push_back({"IK", find("I") * find("K")});
        return out;
    }

    double default_horizon() const override { return 1.0; }

private:
    std::optional<Vector> draw(std::mt19937_64& rng) const {
        const Vector raw = gaussian_vector(dimension(), rng);
        try {
            const Vector s = three_d_ ? fluid::project_incompressible_3d(raw)
                                      : fluid::project_incompressible_2d(raw);
            const double den = three_d_ ? fluid::multiplier_3d(s).denominator
                                        : fluid::multiplier_2d(s).denominator;
            if (std::abs(den) <= fluid::kDegenerateThreshold) {
                return std::nullopt;
            }
            return s;
        } catch (const DegenerateConfigurationError&) {
            return std::nullopt;
        }
    }

    bool three_d_;
};

// ---- chemistry --------------------------------------------------------------

enum class ChemMode { Full11, Pssa11, Full12 };

class Chemistry final : public DynamicalSystem {
public:
    Chemistry(ChemMode mode, ChemistryOptions opts) : mode_(mode), opts_(std::move(opts)) {
        for (double k : opts_.rates) {
            if (!(k > 0.0) || !std::isfinite(k)) {
                throw ConfigError("rate constants must be positive and finite");
            }
        }
        const auto names = variable_names();
        upper_.resize(static_cast<Eigen::Index>(names.size()));
        for (std::size_t i = 0; i < names.size(); ++i) {
            upper_[static_cast<Eigen::Index>(i)] =
                i == static_cast<std::size_t>(chem::O3) ? opts_.o3_upper : opts_.default_upper;
        }
        for (const auto& [species, value] : opts_.upper) {
            auto it = std::find(names.begin(), names.end(), species);
            if (it == names.end()) {
                throw ConfigError("unknown species '" + species + "' in initial ranges");
            }
            if (!(value >= 0.0)) {
                throw ConfigError("initial range for " + species + " must be nonnegative");
            }
            upper_[it - names.begin()] = value;
        }
        if (!(opts_.horizon > 0.0) || opts_.trajectory_points < 2) {
            throw ConfigError("chemistry sampler needs a positive horizon and >= 2 points");
        }
    }

    std::string name() const override {
        switch (mode_) {
            case ChemMode::Full11: return "ozone11";
            case ChemMode::Pssa11: return "ozone11-pssa";
            case ChemMode::Full12: return "ozone12";
        }
        return {};
    }
    std::string description() const override {
        switch (mode_) {
            case ChemMode::Full11: return "ozone photochemistry, 11 species";
            case ChemMode::Pssa11: return "ozone photochemistry, 11 species, O and OH in PSSA";
            case ChemMode::Full12: return "ozone photochemistry with H2O, 12 species";
        }
        return {};
    }
    int dimension() const override {
        return mode_ == ChemMode::Full12 ? chem::kSpecies12 : chem::kSpecies;
    }
    std::vector<std::string> variable_names() const override {
        return chem::species_names(dimension());
    }

    Vector field(const Vector& x) const override {
        switch (mode_) {
            case ChemMode::Full11: return chem::explicit_field(x, opts_.rates);
            case ChemMode::Pssa11: return chem::pssa_field(x, opts_.rates);
            case ChemMode::Full12: return chem::field_12(x, opts_.rates);
        }
        return {};
    }

    Vector observed_state(const Vector& x) const override {
        return mode_ == ChemMode::Pssa11 ? chem::pssa_fill(x, opts_.rates) : x;
    }

    // Points on trajectories from uniform initial conditions, each trajectory
    // contributing `trajectory_points` equally spaced states including t = 0.
    Matrix sample_states(std::size_t count, std::uint64_t seed) const override {
        std::mt19937_64 rng(seed);
        const auto times = uniform_times(opts_.horizon, opts_.trajectory_points);
        Matrix out(static_cast<Eigen::Index>(count), dimension());
        std::size_t filled = 0;
        std::size_t failures = 0;
        std::size_t attempts = 0;
        while (filled < count) {
            ++attempts;
            try {
                const Vector x0 = random_initial_state(rng);
                const Trajectory traj = integrate(
                    [this](const Vector& x) { return field(x); }, x0, times, integrator_options());
                for (Eigen::Index r = 0; r < traj.states.rows() && filled < count; ++r) {
                    out.row(static_cast<Eigen::Index>(filled++)) =
                        observed_state(traj.states.row(r).transpose()).transpose();
                }
            } catch (const Error&) {
                if (++failures * 2 > attempts && attempts >= 4) {
                    throw SamplerError(name() + " sampler: more than half of the trajectories failed");
                }
            }
        }
        return out;
    }

    Vector random_initial_state(std::mt19937_64& rng) const override {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        Vector x(dimension());
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            x[i] = u(rng) * upper_[i];
        }
        return mode_ == ChemMode::Pssa11 ? chem::pssa_fill(x, opts_.rates) : x;
    }

    std::vector<KnownQuantity> known_quantities() const override {
        const int n = dimension();
        std::vector<KnownQuantity> out{
            {"H_C", chem::carbon_balance(n)},
            {"H_N", chem::nitrogen_balance(n)},
            {"CQ3", chem::third_invariant(opts_.rates, n)},
        };
        if (mode_ == ChemMode::Full12) {
            out.push_back({"H_H", chem::hydrogen_balance()});
        }
        return out;
    }

    std::size_t default_sample_count(std::size_t) const override { return 2000; }
    double default_horizon() const override { return opts_.horizon; }
    std::string validation_system() const override {
        return mode_ == ChemMode::Full11 ? "ozone11-pssa" : name();
    }

    IntegratorOptions integrator_options() const override {
        IntegratorOptions o;
        o.nonnegative = true;
        o.rtol = 1e-9;
        o.atol = 1e-14;
        o.step = 1e-4;
        return o;
    }

private:
    ChemMode mode_;
    ChemistryOptions opts_;
    Vector upper_;
};

}  // namespace

std::vector<std::string> system_names() {
    return {"lv3", "harmonic", "fluid2d", "fluid3d", "ozone11", "ozone11-pssa", "ozone12"};
}

std::unique_ptr<DynamicalSystem> make_system(const std::string& name, const SystemOptions& opts) {
    if (name == "lv3") {
        return std::make_unique<LotkaVolterra>();
    }
    if (name == "harmonic") {
        return std::make_unique<Harmonic>();
    }
    if (name == "fluid2d") {
        return std::make_unique<FluidElement>(false);
    }
    if (name == "fluid3d") {
        return std::make_unique<FluidElement>(true);
    }
    if (name == "ozone11") {
        return std::make_unique<Chemistry>(ChemMode::Full11, opts.chemistry);
    }
    if (name == "ozone11-pssa") {
        return std::make_unique<Chemistry>(ChemMode::Pssa11, opts.chemistry);
    }
    if (name == "ozone12") {
        return std::make_unique<Chemistry>(ChemMode::Full12, opts.chemistry);
    }
    throw ConfigError("unknown system '" + name + "'");
}

Catalog known_cq_catalog(const DynamicalSystem& system, const MonomialBasis& basis) {
    if (basis.dimension() != system.dimension()) {
        throw DimensionError("basis dimension does not match system " + system.name());
    }
    Catalog cat;
    for (const auto& q : system.known_quantities()) {
        if (auto theta = q.poly.coefficients_in(basis)) {
            cat.entries.push_back({q.label, std::move(*theta)});
        } else {
            cat.omitted.push_back(q.label);
        }
    }
    return cat;
}

}  // namespace sid
