#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sid/chemistry.hpp"
#include "sid/integrate.hpp"
#include "sid/polybasis.hpp"
#include "sid/polynomial.hpp"
#include "sid/types.hpp"

namespace sid {

struct KnownQuantity {
    std::string label;
    Polynomial poly;
};

struct CatalogEntry {
    std::string label;
    Vector theta;
};

struct Catalog {
    std::vector<CatalogEntry> entries;
    /// Labels whose polynomial needs monomials missing from the basis.
    std::vector<std::string> omitted;
};

class DynamicalSystem {
public:
    virtual ~DynamicalSystem() = default;

    virtual std::string name() const = 0;
    virtual std::string description() const = 0;
    virtual int dimension() const = 0;
    virtual std::vector<std::string> variable_names() const = 0;

    virtual Vector field(const Vector& x) const = 0;

    /// P x d sample matrix, deterministic in `seed`.
    virtual Matrix sample_states(std::size_t count, std::uint64_t seed) const = 0;

    /// Starting point for a validation trajectory.
    virtual Vector random_initial_state(std::mt19937_64& rng) const = 0;

    /// Reference invariants, exactly conserved by `field`.
    virtual std::vector<KnownQuantity> known_quantities() const = 0;

    /// Maps an integrated state to the state on which invariants are
    /// evaluated (identity except for PSSA models, which refill O and OH).
    virtual Vector observed_state(const Vector& x) const { return x; }

    virtual std::size_t default_sample_count(std::size_t basis_size) const;
    /// Validation horizon in the system's time unit.
    virtual double default_horizon() const = 0;
    virtual IntegratorOptions integrator_options() const { return {}; }
    /// Model used to validate invariants found on this system. Chemistry
    /// discovered on the full field is validated on the PSSA model.
    virtual std::string validation_system() const { return name(); }
};

/// Options shared by the chemistry systems; unset fields keep defaults.
struct ChemistryOptions {
    chem::RateConstants rates = chem::default_rates();
    /// Upper bounds of the uniform initial-condition ranges, ppm, keyed by
    /// species name. Missing species use `default_upper`.
    std::map<std::string, double> upper;
    double default_upper = 0.01;
    double o3_upper = 0.1;
    double horizon = 20.0;
    std::size_t trajectory_points = 40;
};

struct SystemOptions {
    ChemistryOptions chemistry;
};

/// (x(y-z), y(z-x), z(x-y)).
Vector lotka_volterra_field(const Vector& x);
/// (p, -x).
Vector harmonic_field(const Vector& x);

std::vector<std::string> system_names();

/// Throws ConfigError for an unknown name.
std::unique_ptr<DynamicalSystem> make_system(const std::string& name,
                                             const SystemOptions& opts = {});

/// Expresses every known quantity in `basis`.
Catalog known_cq_catalog(const DynamicalSystem& system, const MonomialBasis& basis);

/// Evaluates the field on every row of `points`; rows of the result are f(x_p).
Matrix evaluate_field(const DynamicalSystem& system, const Matrix& points);

}  // namespace sid
