#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sid/detector.hpp"
#include "sid/polybasis.hpp"
#include "sid/types.hpp"

namespace sid {

struct Rational {
    long num = 0;
    long den = 1;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    friend bool operator==(const Rational&, const Rational&) = default;
};

/// Best rational approximation p/q of x with 1 <= q <= max_den, from the
/// continued-fraction convergents and semiconvergents.
Rational best_rational(double x, long max_den);

struct SnapOptions {
    long max_den = 12;
    double entry_tol = 0.02;
    /// A snapped vector may have a conservation residual of at most
    /// conservation_tol times the original one (or residual_floor).
    double conservation_tol = 10.0;
    double residual_floor = 1e-12;
    /// Entries below zero_tol * max |theta| are treated as exact zeros.
    double zero_tol = 1e-10;
};

struct SnapResult {
    Vector original;
    std::size_t pivot_index = 0;
    double pivot = 0.0;
    Vector ratios;   // original / pivot
    Vector snapped;  // ratios with accepted snaps applied
    std::vector<std::optional<Rational>> rational;  // set where a snap is kept
    std::vector<bool> accepted;
    Vector entry_residual;  // |ratio - nearest rational|
    double residual_before = 0.0;
    double residual_after = 0.0;
};

/// max_p |G theta|_p / ||theta||_2; zero when G has no rows.
double conservation_residual(const Matrix& g, const Vector& theta);

/// Divides by the smallest nonzero entry, snaps ratios to nearby rationals,
/// then reverts snaps one at a time (the revert that helps most first) until
/// the conservation residual on the rows of `g` is acceptable.
SnapResult snap_rational(const Vector& theta, const Matrix& g, const SnapOptions& opts = {});

/// Every ratio rounded to its best rational with denominator <= max_den, with
/// no tolerance and no conservation check.
SnapResult round_rational(const Vector& theta, long max_den, double zero_tol = 1e-10);

double cosine_similarity(const Vector& a, const Vector& b);

/// Names each column after the catalog entry it is parallel to (|cosine| at
/// least min_cosine), or "H<j>" when none is.
std::vector<std::string> match_catalog(const Matrix& thetas, const Catalog& catalog,
                                       double min_cosine = 0.999);

struct FormatOptions {
    int digits = 6;
    double zero_tol = 1e-10;
};

/// "6*O3 - 5*NO + NO2 + ...", terms in basis order. When `rational` is given,
/// entries that carry a rational print as p or p/q.
std::string format_formula(const Vector& theta, const MonomialBasis& basis,
                           const std::vector<std::string>& names,
                           const std::vector<std::optional<Rational>>* rational = nullptr,
                           const FormatOptions& opts = {});

/// Inverse of format_formula; throws DomainError on unknown terms.
Vector parse_formula(const std::string& text, const MonomialBasis& basis,
                     const std::vector<std::string>& names);

/// ||theta - Q Q^T theta|| / ||theta|| for orthonormal Q.
double project_onto_nullspace(const Vector& theta, const Matrix& q);

/// Snapped stage-3 invariants with their formulas.
struct SnappedInvariant {
    SnapResult snap;
    std::string formula;
};

/// Snaps every stage-3 column, checking conservation on `check_points`.
std::vector<SnappedInvariant> snap_stage3(const DiscoveryReport& report,
                                          const DynamicalSystem& system,
                                          const Matrix& check_points,
                                          const SnapOptions& opts = {});

nlohmann::json to_json(const DiscoveryReport& report);
DiscoveryReport report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const std::vector<SnappedInvariant>& snaps);

/// report.json (config echo, report, snapped formulas), timings.json,
/// spectrum_g.csv, spectrum_a.csv, theta_stage{1,2,3}.csv and formulas.txt.
void export_report(const DiscoveryReport& report, const std::vector<SnappedInvariant>& snaps,
                   const nlohmann::json& config, const std::string& directory);

void write_text(const std::string& path, const std::string& content);
nlohmann::json read_json(const std::string& path);

}  // namespace sid
