#include "sid/detector.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "sid/errors.hpp"
#include "sid/parallel.hpp"
#include "sid/report.hpp"

namespace sid {

std::string to_string(ThresholdMode m) {
    switch (m) {
        case ThresholdMode::Absolute: return "absolute";
        case ThresholdMode::Relative: return "relative";
        case ThresholdMode::LogGap: return "log-gap";
    }
    return {};
}

ThresholdMode threshold_mode_from_string(const std::string& s) {
    if (s == "absolute") {
        return ThresholdMode::Absolute;
    }
    if (s == "relative") {
        return ThresholdMode::Relative;
    }
    if (s == "log-gap") {
        return ThresholdMode::LogGap;
    }
    throw ConfigError("unknown threshold mode '" + s + "' (absolute, relative or log-gap)");
}

// ---- G matrix and null space ------------------------------------------------

Matrix build_g_matrix(const DynamicalSystem& system, const MonomialBasis& basis,
                      const Matrix& points) {
    if (basis.dimension() != system.dimension() || points.cols() != system.dimension()) {
        throw DimensionError("system, basis and sample dimensions disagree");
    }
    const Eigen::Index p_count = points.rows();
    Matrix g(p_count, static_cast<Eigen::Index>(basis.size()));
    parallel_for(static_cast<std::size_t>(p_count), [&](std::size_t p) {
        const auto row = static_cast<Eigen::Index>(p);
        const Vector x = points.row(row).transpose();
        Vector f;
        try {
            f = system.field(x);
        } catch (const Error& e) {
            throw Error("field evaluation failed at sample " + std::to_string(p) + ": " + e.what());
        }
        g.row(row) = basis.directional_derivative(x, f).transpose();
    });
    return g;
}

std::size_t count_below(const std::vector<double>& values, const ThresholdOptions& opts,
                        double* cut) {
    const std::size_t n = values.size();
    double threshold = 0.0;
    std::size_t below = 0;
    switch (opts.mode) {
        case ThresholdMode::Absolute:
            threshold = opts.eps;
            break;
        case ThresholdMode::Relative:
            threshold = n > 0 ? opts.eps * values.front() : 0.0;
            break;
        case ThresholdMode::LogGap: {
            if (n == 0) {
                break;
            }
            if (values.front() == 0.0) {
                threshold = std::numeric_limits<double>::min();
                below = n;
                break;
            }
            constexpr double floor = 1e-300;
            double best_gap = 0.0;
            std::size_t split = n;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                const double gap = std::log10(std::max(values[i], floor)) -
                                   std::log10(std::max(values[i + 1], floor));
                if (gap > best_gap) {
                    best_gap = gap;
                    split = i;
                }
            }
            if (split < n && best_gap >= opts.min_gap_decades) {
                threshold = std::sqrt(std::max(values[split], floor) *
                                      std::max(values[split + 1], floor));
                below = n - 1 - split;
            }
            if (cut) {
                *cut = threshold;
            }
            return below;
        }
    }
    below = static_cast<std::size_t>(
        std::count_if(values.begin(), values.end(), [&](double v) { return v < threshold; }));
    if (cut) {
        *cut = threshold;
    }
    return below;
}

namespace {

std::vector<double> column_entropies(const Matrix& theta) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(theta.cols()));
    for (Eigen::Index j = 0; j < theta.cols(); ++j) {
        out.push_back(entropy_score(theta.col(j)));
    }
    return out;
}

}  // namespace

NullspaceResult nullspace(const Matrix& g, const ThresholdOptions& opts) {
    if (!g.allFinite()) {
        throw DomainError("G matrix contains non-finite entries");
    }
    const Eigen::Index k = g.cols();
    if (k == 0) {
        throw DimensionError("G matrix has no columns");
    }
    const bool wide = g.rows() < k;
    Eigen::BDCSVD<Matrix> svd(g, wide ? Eigen::ComputeFullV : Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) {
        throw Error("SVD of the G matrix did not converge");
    }

    NullspaceResult out;
    const Vector& sv = svd.singularValues();
    out.spectrum.values.assign(sv.data(), sv.data() + sv.size());
    out.spectrum.values.resize(static_cast<std::size_t>(k), 0.0);
    out.spectrum.below = count_below(out.spectrum.values, opts, &out.spectrum.threshold);

    const auto m = static_cast<Eigen::Index>(out.spectrum.below);
    out.stage1.stage = 1;
    out.stage1.theta = svd.matrixV().rightCols(m);
    out.stage1.entropy = column_entropies(out.stage1.theta);
    out.residual = m > 0 && g.rows() > 0 ? (g * out.stage1.theta).cwiseAbs().maxCoeff() : 0.0;
    return out;
}

// ---- sparsification ---------------------------------------------------------

double l1_norm(const Matrix& theta) { return theta.cwiseAbs().sum(); }

double entropy_score(const Vector& theta) {
    const double total = theta.cwiseAbs().sum();
    if (!(total > 0.0)) {
        throw DomainError("entropy of a zero vector is undefined");
    }
    double s = 0.0;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const double p = std::abs(theta[i]) / total;
        if (p > 0.0) {
            s -= p * std::log(p);
        }
    }
    return s;
}

void normalize_signs(Matrix& theta) {
    for (Eigen::Index j = 0; j < theta.cols(); ++j) {
        Eigen::Index arg = 0;
        theta.col(j).cwiseAbs().maxCoeff(&arg);
        if (theta(arg, j) < 0.0) {
            theta.col(j) *= -1.0;
        }
    }
}

// With a_k = r cos(alpha), b_k = r sin(alpha) the objective is
// sum_k r (|cos(phi - alpha)| + |sin(phi - alpha)|): period pi/2 and concave
// between the breakpoints phi = alpha mod pi/2, so its minimum sits on a
// breakpoint. On [0, pi/2) it equals C cos(phi) + D sin(phi), where each
// entry switches its (C, D) contribution when phi passes its breakpoint.
// Angles are handled as (cos, sin) pairs ordered by s / (c + s), which is
// monotone on [0, pi/2), so no trigonometric calls are needed.
namespace {

struct PairEvent {
    double key;
    double cos;
    double sin;
    double dc;
    double dd;
};

struct GridPoint {
    double key;
    double cos;
    double sin;
};

const std::vector<GridPoint>& grid_points(std::size_t grid) {
    thread_local std::size_t cached_size = 0;
    thread_local std::vector<GridPoint> cached;
    if (cached_size != grid) {
        cached.clear();
        for (std::size_t i = 1; i < grid; ++i) {
            const double phi = std::numbers::pi / 2.0 * static_cast<double>(i) /
                               static_cast<double>(grid);
            const double cg = std::cos(phi);
            const double sg = std::sin(phi);
            cached.push_back({sg / (cg + sg), cg, sg});
        }
        cached_size = grid;
    }
    return cached;
}

PairRotation solve_pair(const double* a, const double* b, Eigen::Index n, std::size_t grid) {
    thread_local std::vector<PairEvent> events;
    events.clear();
    double c = 0.0;
    double d = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        const double r = std::hypot(a[k], b[k]);
        if (r == 0.0) {
            continue;
        }
        double cb = a[k] / r;
        double sb = b[k] / r;
        // Rotate by -pi/2 until the angle lies in [0, pi/2).
        for (int turn = 0; turn < 4 && !(cb > 0.0 && sb >= 0.0); ++turn) {
            const double t = cb;
            cb = sb;
            sb = -t;
        }
        c += r * (cb + sb);
        d += r * (sb - cb);
        events.push_back({sb / (cb + sb), cb, sb, -2.0 * r * sb, 2.0 * r * cb});
    }
    std::sort(events.begin(), events.end(),
              [](const PairEvent& x, const PairEvent& y) { return x.key < y.key; });

    PairRotation best;
    best.value = c;
    auto consider = [&](double cs, double sn) {
        const double value = c * cs + d * sn;
        if (value < best.value) {
            best.value = value;
            best.cos = cs;
            best.sin = sn;
        }
    };
    const auto& points = grid_points(grid);
    std::size_t g = 0;
    for (const auto& e : events) {
        for (; g < points.size() && points[g].key < e.key; ++g) {
            consider(points[g].cos, points[g].sin);
        }
        c += e.dc;
        d += e.dd;
        consider(e.cos, e.sin);
    }
    for (; g < points.size(); ++g) {
        consider(points[g].cos, points[g].sin);
    }
    best.angle = std::atan2(best.sin, best.cos);
    return best;
}

}  // namespace

PairRotation best_pair_rotation(const Vector& a, const Vector& b, std::size_t grid) {
    if (a.size() != b.size()) {
        throw DimensionError("pair columns differ in length");
    }
    return solve_pair(a.data(), b.data(), a.size(), grid);
}

namespace {

struct Run {
    Matrix theta;
    Matrix rotation;
    std::vector<double> history;
};

// Steps that gain less than this fraction of the pair norm are rounding noise.
constexpr double kPairGain = 1e-12;
constexpr double kZeroRow = 1e-12;

Run descend(Matrix theta, Matrix rotation, const SparsifyOptions& opts) {
    const Eigen::Index m = theta.cols();
    Run run;
    double current = l1_norm(theta);
    run.history.push_back(current);
    // A pair whose columns have not changed since it was last examined
    // without improvement would give the same answer again; skip it.
    std::vector<std::size_t> version(static_cast<std::size_t>(m), 0);
    std::vector<std::pair<std::size_t, std::size_t>> seen(
        static_cast<std::size_t>(m * m), {std::numeric_limits<std::size_t>::max(), 0});
    Vector na(theta.rows());
    Vector nb(theta.rows());
    for (std::size_t sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        for (Eigen::Index i = 0; i + 1 < m; ++i) {
            for (Eigen::Index j = i + 1; j < m; ++j) {
                const auto ui = static_cast<std::size_t>(i);
                const auto uj = static_cast<std::size_t>(j);
                auto& last = seen[ui * static_cast<std::size_t>(m) + uj];
                if (last.first == version[ui] && last.second == version[uj]) {
                    continue;
                }
                const PairRotation rot =
                    solve_pair(theta.col(i).data(), theta.col(j).data(), theta.rows(), opts.grid);
                const double cs = rot.cos;
                const double sn = rot.sin;
                na = cs * theta.col(i) + sn * theta.col(j);
                nb = -sn * theta.col(i) + cs * theta.col(j);
                const double before = theta.col(i).lpNorm<1>() + theta.col(j).lpNorm<1>();
                const double after = na.lpNorm<1>() + nb.lpNorm<1>();
                if (sn == 0.0 || !(after < before - kPairGain * before)) {
                    last = {version[ui], version[uj]};
                    continue;
                }
                theta.col(i) = na;
                theta.col(j) = nb;
                const Vector ra = rotation.col(i);
                const Vector rb = rotation.col(j);
                rotation.col(i) = cs * ra + sn * rb;
                rotation.col(j) = -sn * ra + cs * rb;
                ++version[ui];
                ++version[uj];
            }
        }
        const double next = l1_norm(theta);
        run.history.push_back(next);
        const bool converged = current - next < opts.tol * current;
        current = next;
        if (converged) {
            break;
        }
    }
    run.theta = std::move(theta);
    run.rotation = std::move(rotation);
    return run;
}

Matrix random_orthogonal(Eigen::Index m, std::uint64_t seed, std::uint64_t restart) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(restart)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix z(m, m);
    for (Eigen::Index r = 0; r < m; ++r) {
        for (Eigen::Index c = 0; c < m; ++c) {
            z(r, c) = n(rng);
        }
    }
    Eigen::HouseholderQR<Matrix> qr(z);
    Matrix q = qr.householderQ() * Matrix::Identity(m, m);
    // Fix the sign ambiguity so Q is Haar distributed.
    const Matrix rr = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index c = 0; c < m; ++c) {
        if (rr(c, c) < 0.0) {
            q.col(c) *= -1.0;
        }
    }
    return q;
}

}  // namespace

SparsifyResult sparsify(const CoefficientSet& stage1, const SparsifyOptions& opts) {
    const Matrix& theta1 = stage1.theta;
    const Eigen::Index m = theta1.cols();
    SparsifyResult out;
    out.l1_before = l1_norm(theta1);

    Run best;
    if (m <= 1) {
        best.theta = theta1;
        best.rotation = Matrix::Identity(m, m);
        best.history = {out.l1_before};
    } else {
        // Rows that are zero up to rounding cannot change the objective; the
        // rotation is searched on the remaining rows and applied to all.
        const double max_row = theta1.rowwise().norm().maxCoeff();
        std::vector<Eigen::Index> rows;
        for (Eigen::Index r = 0; r < theta1.rows(); ++r) {
            if (theta1.row(r).norm() > kZeroRow * max_row) {
                rows.push_back(r);
            }
        }
        const Matrix reduced = theta1(rows, Eigen::all);
        best = descend(reduced, Matrix::Identity(m, m), opts);
        for (std::size_t r = 1; r <= opts.restarts; ++r) {
            const Matrix q = random_orthogonal(m, opts.seed, r);
            Run run = descend(reduced * q, q, opts);
            if (run.history.back() < best.history.back()) {
                best = std::move(run);
            }
        }
        best.theta = theta1 * best.rotation;
    }

    // Sign-normalise, then order by entropy (stable, so ties keep index order).
    Matrix theta = best.theta;
    Matrix rotation = best.rotation;
    for (Eigen::Index j = 0; j < m; ++j) {
        Eigen::Index arg = 0;
        theta.col(j).cwiseAbs().maxCoeff(&arg);
        if (theta(arg, j) < 0.0) {
            theta.col(j) *= -1.0;
            rotation.col(j) *= -1.0;
        }
    }
    const std::vector<double> entropy = column_entropies(theta);
    std::vector<std::size_t> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return entropy[x] < entropy[y]; });

    out.stage2.stage = 2;
    out.stage2.theta.resize(theta.rows(), m);
    out.rotation.resize(m, m);
    for (std::size_t j = 0; j < order.size(); ++j) {
        const auto dst = static_cast<Eigen::Index>(j);
        const auto src = static_cast<Eigen::Index>(order[j]);
        out.stage2.theta.col(dst) = theta.col(src);
        out.rotation.col(dst) = rotation.col(src);
        out.stage2.entropy.push_back(entropy[order[j]]);
    }
    out.l1_after = l1_norm(out.stage2.theta);
    out.history = std::move(best.history);
    return out;
}

// ---- functional independence ------------------------------------------------

namespace {

std::size_t numeric_rank(const Vector& singular_values, double eps) {
    if (singular_values.size() == 0) {
        return 0;
    }
    const double cut = eps * std::max(1.0, singular_values[0]);
    return static_cast<std::size_t>((singular_values.array() > cut).count());
}

Vector singular_values(const Matrix& a) {
    if (a.cols() == 0 || a.rows() == 0) {
        return Vector();
    }
    return Eigen::JacobiSVD<Matrix>(a).singularValues();
}

// Most frequent rank, ties going to the larger one.
std::size_t mode_rank(const std::vector<std::size_t>& ranks, std::size_t max_rank,
                      std::vector<std::size_t>* histogram = nullptr) {
    std::vector<std::size_t> h(max_rank + 1, 0);
    for (auto r : ranks) {
        ++h[r];
    }
    std::size_t best = 0;
    for (std::size_t r = 0; r <= max_rank; ++r) {
        if (h[r] >= h[best]) {
            best = r;
        }
    }
    if (histogram) {
        *histogram = std::move(h);
    }
    return best;
}

std::vector<Matrix> point_gradients(const Matrix& theta, const MonomialBasis& basis,
                                    const Matrix& points, std::size_t n) {
    std::vector<Matrix> grads(n);
    parallel_for(n, [&](std::size_t p) {
        grads[p] = basis.combination_gradient(points.row(static_cast<Eigen::Index>(p)).transpose(),
                                              theta);
    });
    return grads;
}

}  // namespace

IndependenceResult count_independent(const Matrix& theta, const MonomialBasis& basis,
                                     const Matrix& points, const IndependenceOptions& opts) {
    IndependenceResult out;
    const auto m = static_cast<std::size_t>(theta.cols());
    const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(points.rows()),
                                                std::max<std::size_t>(opts.max_points, 1));
    out.points_used = n;
    if (m == 0 || n == 0) {
        out.histogram.assign(1, n);
        return out;
    }
    const auto grads = point_gradients(theta, basis, points, n);
    std::vector<Vector> spectra(n);
    std::vector<std::size_t> ranks(n);
    parallel_for(n, [&](std::size_t p) {
        spectra[p] = singular_values(grads[p]);
        ranks[p] = numeric_rank(spectra[p], opts.eps);
    });
    const std::size_t max_rank = std::min<std::size_t>(m, static_cast<std::size_t>(basis.dimension()));
    out.c = mode_rank(ranks, max_rank, &out.histogram);
    for (std::size_t p = 0; p < n; ++p) {
        if (ranks[p] == out.c) {
            out.spectrum.assign(spectra[p].data(), spectra[p].data() + spectra[p].size());
            break;
        }
    }
    return out;
}

CoefficientSet select_independent(const CoefficientSet& stage2, std::size_t c,
                                  const MonomialBasis& basis, const Matrix& points,
                                  const IndependenceOptions& opts) {
    CoefficientSet out;
    out.stage = 3;
    out.theta.resize(stage2.theta.rows(), 0);
    const auto m = static_cast<std::size_t>(stage2.theta.cols());
    if (c == 0) {
        return out;
    }
    const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(points.rows()),
                                                std::max<std::size_t>(opts.max_points, 1));
    const auto grads = point_gradients(stage2.theta, basis, points, n);

    std::vector<std::size_t> chosen;
    std::vector<std::size_t> ranks(n);
    for (std::size_t j = 0; j < m && chosen.size() < c; ++j) {
        std::vector<Eigen::Index> cols(chosen.begin(), chosen.end());
        cols.push_back(static_cast<Eigen::Index>(j));
        parallel_for(n, [&](std::size_t p) {
            ranks[p] = numeric_rank(singular_values(grads[p](Eigen::all, cols)), opts.eps);
        });
        if (mode_rank(ranks, cols.size()) == cols.size()) {
            chosen.push_back(j);
        }
    }
    if (chosen.size() < c) {
        throw InconsistencyError("greedy selection found " + std::to_string(chosen.size()) +
                                 " independent invariants, expected " + std::to_string(c) +
                                 "; the thresholds are probably miscalibrated");
    }
    out.theta.resize(stage2.theta.rows(), static_cast<Eigen::Index>(c));
    for (std::size_t i = 0; i < c; ++i) {
        out.theta.col(static_cast<Eigen::Index>(i)) =
            stage2.theta.col(static_cast<Eigen::Index>(chosen[i]));
        out.entropy.push_back(stage2.entropy.at(chosen[i]));
    }
    out.source = chosen;
    return out;
}

// ---- pipeline ---------------------------------------------------------------

DiscoveryReport discover(const DynamicalSystem& system, const MonomialBasis& basis,
                         const DiscoverOptions& opts) {
    using clock = std::chrono::steady_clock;
    auto seconds = [](clock::time_point a, clock::time_point b) {
        return std::chrono::duration<double>(b - a).count();
    };
    if (basis.dimension() != system.dimension()) {
        throw DimensionError("basis dimension " + std::to_string(basis.dimension()) +
                             " does not match system " + system.name() + " (d=" +
                             std::to_string(system.dimension()) + ")");
    }

    DiscoveryReport r;
    r.system = system.name();
    r.variables = system.variable_names();
    r.basis = basis;
    r.seed = opts.seed;
    r.threshold = opts.threshold;
    r.samples = opts.samples > 0 ? opts.samples : system.default_sample_count(basis.size());
    if (r.samples < basis.size()) {
        r.warnings.push_back("P=" + std::to_string(r.samples) + " is below K=" +
                             std::to_string(basis.size()) + "; the null space may be inflated");
    }

    auto t0 = clock::now();
    const Matrix points = system.sample_states(r.samples, opts.seed);
    auto t1 = clock::now();
    r.timings["sample"] = seconds(t0, t1);

    const Matrix g = build_g_matrix(system, basis, points);
    auto t2 = clock::now();
    r.timings["g_matrix"] = seconds(t1, t2);

    NullspaceResult ns = nullspace(g, opts.threshold);
    r.spectrum_g = std::move(ns.spectrum);
    r.g_residual = ns.residual;
    r.stage1 = std::move(ns.stage1);
    auto t3 = clock::now();
    r.timings["nullspace"] = seconds(t2, t3);

    if (opts.counts_only) {
        // The generic rank depends only on the span, so stage 1 suffices.
        r.independence = count_independent(r.stage1.theta, basis, points, opts.independence);
        r.timings["independence"] = seconds(t3, clock::now());
    } else {
        SparsifyResult sp = sparsify(r.stage1, opts.sparsify);
        r.stage2 = std::move(sp.stage2);
        r.rotation = std::move(sp.rotation);
        r.sparsify_history = std::move(sp.history);
        auto t4 = clock::now();
        r.timings["sparsify"] = seconds(t3, t4);

        r.independence = count_independent(r.stage2.theta, basis, points, opts.independence);
        r.stage3 =
            select_independent(r.stage2, r.independence.c, basis, points, opts.independence);
        r.timings["independence"] = seconds(t4, clock::now());
    }

    const Catalog cat = known_cq_catalog(system, basis);
    for (const auto& e : cat.entries) {
        r.catalog.push_back({e.label, project_onto_nullspace(e.theta, r.stage1.theta)});
    }
    r.catalog_omitted = cat.omitted;
    r.timings["total"] = seconds(t0, clock::now());
    return r;
}

}  // namespace sid
