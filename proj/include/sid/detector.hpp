#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sid/polybasis.hpp"
#include "sid/systems.hpp"
#include "sid/types.hpp"

namespace sid {

enum class ThresholdMode { Absolute, Relative, LogGap };

std::string to_string(ThresholdMode m);
ThresholdMode threshold_mode_from_string(const std::string& s);

struct ThresholdOptions {
    ThresholdMode mode = ThresholdMode::Absolute;
    double eps = 1e-8;
    /// LogGap only: smallest gap, in decades, that counts as a split.
    double min_gap_decades = 3.0;
};

struct SingularSpectrum {
    std::vector<double> values;  // descending
    double threshold = 0.0;      // effective cut: values below it are "zero"
    std::size_t below = 0;
};

struct CoefficientSet {
    int stage = 1;
    Matrix theta;  // K x M, columns are invariants
    std::vector<double> entropy;
    /// Stage 3: the stage-2 column each entry came from.
    std::vector<std::size_t> source;
};

/// G(p, i) = grad b_i(x_p) . f(x_p), rows assembled in parallel.
Matrix build_g_matrix(const DynamicalSystem& system, const MonomialBasis& basis,
                      const Matrix& points);

struct NullspaceResult {
    SingularSpectrum spectrum;
    CoefficientSet stage1;
    double residual = 0.0;  // max |G theta| over all entries
};

/// Right-singular vectors of G whose singular values fall below the
/// threshold. When P < K the K - P missing singular values count as zero.
NullspaceResult nullspace(const Matrix& g, const ThresholdOptions& opts = {});

/// Applies the threshold rule to a descending spectrum; returns the number of
/// trailing values treated as zero and the effective cut.
std::size_t count_below(const std::vector<double>& values, const ThresholdOptions& opts,
                        double* cut = nullptr);

struct SparsifyOptions {
    std::size_t max_sweeps = 100;
    double tol = 1e-8;
    std::size_t restarts = 4;
    std::uint64_t seed = 0;
    std::size_t grid = 512;
};

struct SparsifyResult {
    CoefficientSet stage2;
    Matrix rotation;  // theta2 = theta1 * rotation
    double l1_before = 0.0;
    double l1_after = 0.0;
    /// L1 after each sweep of the winning run, starting with its initial value.
    std::vector<double> history;
};

double l1_norm(const Matrix& theta);

/// Minimises the entrywise L1 norm of theta * R over orthogonal R by Givens
/// sweeps; every pair step is the exact minimiser of the 1D subproblem.
SparsifyResult sparsify(const CoefficientSet& stage1, const SparsifyOptions& opts = {});

struct PairRotation {
    double angle = 0.0;  // in [0, pi/2)
    double cos = 1.0;
    double sin = 0.0;
    double value = 0.0;  // predicted pair objective at `angle`
};

/// Minimiser of sum_k |c a_k + s b_k| + |-s a_k + c b_k| over the rotation
/// angle. Exposed for testing.
PairRotation best_pair_rotation(const Vector& a, const Vector& b, std::size_t grid = 512);

/// Shannon entropy of |theta| / sum |theta|. Throws DomainError on zero.
double entropy_score(const Vector& theta);

/// Flips each column so its largest-magnitude entry is positive.
void normalize_signs(Matrix& theta);

struct IndependenceOptions {
    double eps = 1e-8;
    /// Ranks are taken at the first `max_points` sample points.
    std::size_t max_points = 200;
};

struct IndependenceResult {
    std::size_t c = 0;
    /// Singular values of the gradient matrix at the first point whose rank
    /// equals c.
    std::vector<double> spectrum;
    /// histogram[r] = number of points with pointwise rank r.
    std::vector<std::size_t> histogram;
    std::size_t points_used = 0;
};

/// Rank of A(x) = [grad H_1(x) ... grad H_M(x)] at a generic point: the
/// pointwise rank is computed at each sample and the most frequent value is
/// taken (ties to the larger). A singular value counts as nonzero when it
/// exceeds eps * max(1, largest singular value).
IndependenceResult count_independent(const Matrix& theta, const MonomialBasis& basis,
                                     const Matrix& points, const IndependenceOptions& opts = {});

/// Greedy pass over the columns of stage 2 in order; a column is kept when it
/// raises the generic rank. Throws InconsistencyError if fewer than c are
/// found.
CoefficientSet select_independent(const CoefficientSet& stage2, std::size_t c,
                                  const MonomialBasis& basis, const Matrix& points,
                                  const IndependenceOptions& opts = {});

struct DiscoverOptions {
    std::size_t samples = 0;  // 0: the system default
    std::uint64_t seed = 0;
    ThresholdOptions threshold;
    SparsifyOptions sparsify;
    IndependenceOptions independence;
    /// Stop after counting M and c: no sparsification or selection, so the
    /// report's stage 2 and stage 3 stay empty.
    bool counts_only = false;
};

struct CatalogCheck {
    std::string label;
    double projection_residual = 0.0;
};

struct DiscoveryReport {
    std::string system;
    std::vector<std::string> variables;
    MonomialBasis basis{1, {{1}}};
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    ThresholdOptions threshold;
    SingularSpectrum spectrum_g;
    double g_residual = 0.0;
    CoefficientSet stage1;
    CoefficientSet stage2;
    CoefficientSet stage3;
    Matrix rotation;
    std::vector<double> sparsify_history;
    IndependenceResult independence;
    std::vector<CatalogCheck> catalog;
    std::vector<std::string> catalog_omitted;
    std::vector<std::string> warnings;
    /// Seconds per stage; kept apart from the deterministic content.
    std::map<std::string, double> timings;

    std::size_t m() const { return static_cast<std::size_t>(stage1.theta.cols()); }
    std::size_t c() const { return independence.c; }
};

DiscoveryReport discover(const DynamicalSystem& system, const MonomialBasis& basis,
                         const DiscoverOptions& opts = {});

}  // namespace sid
