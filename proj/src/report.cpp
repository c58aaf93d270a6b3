#include "sid/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "sid/errors.hpp"

namespace sid {

// ---- rationals --------------------------------------------------------------

Rational best_rational(double x, long max_den) {
    if (max_den < 1) {
        throw DomainError("max_den must be at least 1");
    }
    if (!std::isfinite(x)) {
        throw DomainError("cannot approximate a non-finite value");
    }
    const bool negative = x < 0.0;
    const double target = std::abs(x);
    if (target > 1e15) {
        return {static_cast<long>(std::llround(x)), 1};
    }
    // Convergents h/k of the continued fraction of target.
    long h2 = 0, h1 = 1, k2 = 1, k1 = 0;
    double r = target;
    for (int iter = 0; iter < 64; ++iter) {
        const double a_real = std::floor(r);
        const long a = static_cast<long>(a_real);
        const long k = a * k1 + k2;
        if (k > max_den) {
            // Largest admissible semiconvergent versus the last convergent.
            const long t = (max_den - k2) / k1;
            const Rational semi{t * h1 + h2, t * k1 + k2};
            const Rational conv{h1, k1};
            const Rational best =
                std::abs(conv.value() - target) <= std::abs(semi.value() - target) ? conv : semi;
            return {negative ? -best.num : best.num, best.den};
        }
        const long h = a * h1 + h2;
        h2 = h1;
        h1 = h;
        k2 = k1;
        k1 = k;
        const double frac = r - a_real;
        if (frac < 1e-12) {
            break;
        }
        r = 1.0 / frac;
    }
    return {negative ? -h1 : h1, k1};
}

// ---- snapping ---------------------------------------------------------------

double conservation_residual(const Matrix& g, const Vector& theta) {
    const double norm = theta.norm();
    if (g.rows() == 0 || norm == 0.0) {
        return 0.0;
    }
    return (g * theta).cwiseAbs().maxCoeff() / norm;
}

SnapResult snap_rational(const Vector& theta, const Matrix& g, const SnapOptions& opts) {
    const Eigen::Index k = theta.size();
    const double largest = theta.cwiseAbs().maxCoeff();
    if (!(largest > 0.0)) {
        throw DomainError("cannot snap a zero vector");
    }
    if (g.rows() > 0 && g.cols() != k) {
        throw DimensionError("G matrix width does not match the coefficient vector");
    }
    SnapResult out;
    out.original = theta;
    const double zero_cut = opts.zero_tol * largest;

    double smallest = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < k; ++i) {
        const double a = std::abs(theta[i]);
        if (a > zero_cut && a < smallest) {
            smallest = a;
            out.pivot_index = static_cast<std::size_t>(i);
        }
    }
    out.pivot = theta[static_cast<Eigen::Index>(out.pivot_index)];
    out.ratios = theta / out.pivot;
    out.snapped = out.ratios;
    out.rational.assign(static_cast<std::size_t>(k), std::nullopt);
    out.accepted.assign(static_cast<std::size_t>(k), false);
    out.entry_residual = Vector::Zero(k);

    std::vector<std::size_t> revertible;
    for (Eigen::Index i = 0; i < k; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        if (std::abs(theta[i]) <= zero_cut) {
            out.snapped[i] = 0.0;
            out.rational[idx] = Rational{0, 1};
            out.accepted[idx] = true;
            out.entry_residual[i] = std::abs(out.ratios[i]);
            continue;
        }
        const Rational q = best_rational(out.ratios[i], opts.max_den);
        out.entry_residual[i] = std::abs(out.ratios[i] - q.value());
        if (out.entry_residual[i] < opts.entry_tol) {
            out.snapped[i] = q.value();
            out.rational[idx] = q;
            out.accepted[idx] = true;
            revertible.push_back(idx);
        }
    }

    out.residual_before = conservation_residual(g, out.ratios);
    const double allowed = std::max(opts.conservation_tol * out.residual_before, opts.residual_floor);
    double current = conservation_residual(g, out.snapped);
    while (current > allowed && !revertible.empty()) {
        std::size_t best_pos = 0;
        double best_residual = std::numeric_limits<double>::infinity();
        for (std::size_t pos = 0; pos < revertible.size(); ++pos) {
            const auto i = static_cast<Eigen::Index>(revertible[pos]);
            Vector trial = out.snapped;
            trial[i] = out.ratios[i];
            const double res = conservation_residual(g, trial);
            if (res < best_residual) {
                best_residual = res;
                best_pos = pos;
            }
        }
        const std::size_t idx = revertible[best_pos];
        out.snapped[static_cast<Eigen::Index>(idx)] = out.ratios[static_cast<Eigen::Index>(idx)];
        out.rational[idx].reset();
        out.accepted[idx] = false;
        revertible.erase(revertible.begin() + static_cast<std::ptrdiff_t>(best_pos));
        current = best_residual;
    }
    out.residual_after = current;
    return out;
}

SnapResult round_rational(const Vector& theta, long max_den, double zero_tol) {
    SnapOptions opts;
    opts.max_den = max_den;
    opts.entry_tol = std::numeric_limits<double>::infinity();
    opts.zero_tol = zero_tol;
    // With no rows to check, no snap is ever reverted.
    return snap_rational(theta, Matrix(0, theta.size()), opts);
}

double cosine_similarity(const Vector& a, const Vector& b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (!(na > 0.0) || !(nb > 0.0)) {
        throw DomainError("cosine similarity of a zero vector is undefined");
    }
    return a.dot(b) / (na * nb);
}

std::vector<std::string> match_catalog(const Matrix& thetas, const Catalog& catalog,
                                       double min_cosine) {
    std::vector<std::string> out;
    for (Eigen::Index j = 0; j < thetas.cols(); ++j) {
        std::string label = "H" + std::to_string(j + 1);
        double best = min_cosine;
        for (const auto& e : catalog.entries) {
            const double c = std::abs(cosine_similarity(thetas.col(j), e.theta));
            if (c >= best) {
                best = c;
                label = e.label;
            }
        }
        out.push_back(label);
    }
    return out;
}

// ---- formulas ---------------------------------------------------------------

namespace {

std::string format_number(double v, int digits) {
    if (v == std::round(v) && std::abs(v) < 1e15) {
        return std::to_string(static_cast<long long>(v));
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

}  // namespace

std::string format_formula(const Vector& theta, const MonomialBasis& basis,
                           const std::vector<std::string>& names,
                           const std::vector<std::optional<Rational>>* rational,
                           const FormatOptions& opts) {
    if (theta.size() != static_cast<Eigen::Index>(basis.size())) {
        throw DimensionError("coefficient vector length does not match the basis");
    }
    const double largest = theta.size() > 0 ? theta.cwiseAbs().maxCoeff() : 0.0;
    std::string out;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const double v = theta[i];
        if (v == 0.0 || std::abs(v) <= opts.zero_tol * largest) {
            continue;
        }
        std::string coef;
        bool negative = v < 0.0;
        const auto idx = static_cast<std::size_t>(i);
        if (rational && idx < rational->size() && (*rational)[idx]) {
            const Rational q = *(*rational)[idx];
            if (q.num == 0) {
                continue;
            }
            negative = q.num < 0;
            const long p = std::labs(q.num);
            if (q.den != 1) {
                coef = std::to_string(p) + "/" + std::to_string(q.den);
            } else if (p != 1) {
                coef = std::to_string(p);
            }
        } else {
            const std::string s = format_number(std::abs(v), opts.digits);
            if (s != "1") {
                coef = s;
            }
        }
        const std::string term = basis.term_label(idx, names);
        const std::string body = coef.empty() ? term : coef + "*" + term;
        if (out.empty()) {
            out = negative ? "-" + body : body;
        } else {
            out += negative ? " - " : " + ";
            out += body;
        }
    }
    return out.empty() ? "0" : out;
}

namespace {

std::optional<double> parse_coefficient(std::string_view s) {
    const auto slash = s.find('/');
    auto parse = [](std::string_view t) -> std::optional<double> {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
            return std::nullopt;
        }
        return v;
    };
    if (slash == std::string_view::npos) {
        return parse(s);
    }
    const auto p = parse(s.substr(0, slash));
    const auto q = parse(s.substr(slash + 1));
    if (!p || !q || *q == 0.0) {
        return std::nullopt;
    }
    return *p / *q;
}

}  // namespace

Vector parse_formula(const std::string& text, const MonomialBasis& basis,
                     const std::vector<std::string>& names) {
    Vector theta = Vector::Zero(static_cast<Eigen::Index>(basis.size()));
    if (text == "0") {
        return theta;
    }
    std::map<std::string, std::size_t> index;
    const auto labels = basis.term_labels(names);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        index.emplace(labels[i], i);
    }
    std::istringstream in(text);
    std::string token;
    double sign = 1.0;
    bool expect_term = true;
    while (in >> token) {
        if (!expect_term) {
            if (token != "+" && token != "-") {
                throw DomainError("expected '+' or '-' in formula, got '" + token + "'");
            }
            sign = token == "-" ? -1.0 : 1.0;
            expect_term = true;
            continue;
        }
        std::string_view body = token;
        if (!body.empty() && body.front() == '-') {
            sign = -sign;
            body.remove_prefix(1);
        }
        double coef = 1.0;
        const auto star = body.find('*');
        if (star != std::string_view::npos) {
            if (auto c = parse_coefficient(body.substr(0, star))) {
                coef = *c;
                body.remove_prefix(star + 1);
            }
        }
        const auto it = index.find(std::string(body));
        if (it == index.end()) {
            throw DomainError("unknown term '" + std::string(body) + "' in formula");
        }
        theta[static_cast<Eigen::Index>(it->second)] += sign * coef;
        sign = 1.0;
        expect_term = false;
    }
    if (expect_term) {
        throw DomainError("formula ends with an operator");
    }
    return theta;
}

double project_onto_nullspace(const Vector& theta, const Matrix& q) {
    if (q.rows() != theta.size()) {
        throw DimensionError("coefficient vector and null-space basis have different lengths");
    }
    const double norm = theta.norm();
    if (!(norm > 0.0)) {
        throw DomainError("cannot project a zero vector");
    }
    if (q.cols() == 0) {
        return 1.0;
    }
    return (theta - q * (q.transpose() * theta)).norm() / norm;
}

std::vector<SnappedInvariant> snap_stage3(const DiscoveryReport& report,
                                          const DynamicalSystem& system,
                                          const Matrix& check_points, const SnapOptions& opts) {
    const Matrix g = build_g_matrix(system, report.basis, check_points);
    std::vector<SnappedInvariant> out;
    for (Eigen::Index j = 0; j < report.stage3.theta.cols(); ++j) {
        SnappedInvariant s;
        s.snap = snap_rational(report.stage3.theta.col(j), g, opts);
        s.formula = format_formula(s.snap.snapped, report.basis, report.variables, &s.snap.rational);
        out.push_back(std::move(s));
    }
    return out;
}

// ---- JSON -------------------------------------------------------------------

namespace {

using nlohmann::json;

json matrix_json(const Matrix& m) {
    std::vector<double> data(m.data(), m.data() + m.size());
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Matrix matrix_from(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
        throw IoError("matrix data length does not match its shape");
    }
    Matrix m(rows, cols);
    std::copy(data.begin(), data.end(), m.data());
    return m;
}

json stage_json(const CoefficientSet& s) {
    json j{{"stage", s.stage}, {"theta", matrix_json(s.theta)}, {"entropy", s.entropy}};
    if (!s.source.empty()) {
        j["source"] = s.source;
    }
    return j;
}

CoefficientSet stage_from(const json& j) {
    CoefficientSet s;
    s.stage = j.at("stage").get<int>();
    s.theta = matrix_from(j.at("theta"));
    s.entropy = j.at("entropy").get<std::vector<double>>();
    if (j.contains("source")) {
        s.source = j.at("source").get<std::vector<std::size_t>>();
    }
    return s;
}

}  // namespace

nlohmann::json to_json(const DiscoveryReport& r) {
    json catalog = json::array();
    for (const auto& c : r.catalog) {
        catalog.push_back({{"label", c.label}, {"projection_residual", c.projection_residual}});
    }
    return json{
        {"system", r.system},
        {"variables", r.variables},
        {"basis", r.basis.to_json()},
        {"samples", r.samples},
        {"seed", r.seed},
        {"threshold",
         {{"mode", to_string(r.threshold.mode)},
          {"eps", r.threshold.eps},
          {"min_gap_decades", r.threshold.min_gap_decades},
          {"cut", r.spectrum_g.threshold}}},
        {"counts", {{"K", r.basis.size()}, {"M", r.m()}, {"c", r.c()}}},
        {"spectrum_g", r.spectrum_g.values},
        {"g_residual", r.g_residual},
        {"stage1", stage_json(r.stage1)},
        {"stage2", stage_json(r.stage2)},
        {"stage3", stage_json(r.stage3)},
        {"rotation", matrix_json(r.rotation)},
        {"sparsify_history", r.sparsify_history},
        {"independence",
         {{"c", r.independence.c},
          {"spectrum", r.independence.spectrum},
          {"histogram", r.independence.histogram},
          {"points_used", r.independence.points_used}}},
        {"catalog", catalog},
        {"catalog_omitted", r.catalog_omitted},
        {"warnings", r.warnings},
    };
}

DiscoveryReport report_from_json(const nlohmann::json& j) {
    try {
        DiscoveryReport r;
        r.system = j.at("system").get<std::string>();
        r.variables = j.at("variables").get<std::vector<std::string>>();
        r.basis = MonomialBasis::from_json(j.at("basis"));
        r.samples = j.at("samples").get<std::size_t>();
        r.seed = j.at("seed").get<std::uint64_t>();
        const auto& t = j.at("threshold");
        r.threshold.mode = threshold_mode_from_string(t.at("mode").get<std::string>());
        r.threshold.eps = t.at("eps").get<double>();
        r.threshold.min_gap_decades = t.at("min_gap_decades").get<double>();
        r.spectrum_g.values = j.at("spectrum_g").get<std::vector<double>>();
        r.spectrum_g.threshold = t.at("cut").get<double>();
        r.g_residual = j.at("g_residual").get<double>();
        r.stage1 = stage_from(j.at("stage1"));
        r.stage2 = stage_from(j.at("stage2"));
        r.stage3 = stage_from(j.at("stage3"));
        r.spectrum_g.below = static_cast<std::size_t>(r.stage1.theta.cols());
        r.rotation = matrix_from(j.at("rotation"));
        r.sparsify_history = j.at("sparsify_history").get<std::vector<double>>();
        const auto& ind = j.at("independence");
        r.independence.c = ind.at("c").get<std::size_t>();
        r.independence.spectrum = ind.at("spectrum").get<std::vector<double>>();
        r.independence.histogram = ind.at("histogram").get<std::vector<std::size_t>>();
        r.independence.points_used = ind.at("points_used").get<std::size_t>();
        for (const auto& c : j.at("catalog")) {
            r.catalog.push_back(
                {c.at("label").get<std::string>(), c.at("projection_residual").get<double>()});
        }
        r.catalog_omitted = j.at("catalog_omitted").get<std::vector<std::string>>();
        r.warnings = j.at("warnings").get<std::vector<std::string>>();
        if (r.stage3.theta.size() > 0 &&
            r.stage3.theta.rows() != static_cast<Eigen::Index>(r.basis.size())) {
            throw IoError("stage-3 matrix does not match the basis size");
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed report: ") + e.what());
    }
}

nlohmann::json to_json(const std::vector<SnappedInvariant>& snaps) {
    json out = json::array();
    for (const auto& s : snaps) {
        json rationals = json::array();
        for (const auto& q : s.snap.rational) {
            rationals.push_back(q ? json::array({q->num, q->den}) : json(nullptr));
        }
        out.push_back({
            {"formula", s.formula},
            {"pivot_index", s.snap.pivot_index},
            {"pivot", s.snap.pivot},
            {"snapped", std::vector<double>(s.snap.snapped.data(),
                                            s.snap.snapped.data() + s.snap.snapped.size())},
            {"rational", rationals},
            {"residual_before", s.snap.residual_before},
            {"residual_after", s.snap.residual_after},
        });
    }
    return out;
}

// ---- files ------------------------------------------------------------------

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open " + path + " for writing");
    }
    out << content;
    if (!out) {
        throw IoError("failed while writing " + path);
    }
}

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
}

namespace {

std::ostringstream csv_stream() {
    std::ostringstream s;
    s.imbue(std::locale::classic());
    s << std::setprecision(17);
    return s;
}

std::string spectrum_csv(const std::vector<double>& values) {
    auto s = csv_stream();
    s << "index,sigma\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
        s << i << ',' << values[i] << '\n';
    }
    return s.str();
}

std::string theta_csv(const Matrix& theta, const std::vector<std::string>& labels) {
    auto s = csv_stream();
    s << "term";
    for (Eigen::Index j = 0; j < theta.cols(); ++j) {
        s << ",theta_" << (j + 1);
    }
    s << '\n';
    for (Eigen::Index i = 0; i < theta.rows(); ++i) {
        s << labels[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < theta.cols(); ++j) {
            s << ',' << theta(i, j);
        }
        s << '\n';
    }
    return s.str();
}

}  // namespace

void export_report(const DiscoveryReport& report, const std::vector<SnappedInvariant>& snaps,
                   const nlohmann::json& config, const std::string& directory) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(directory, ec);
    if (ec) {
        throw IoError("cannot create " + directory + ": " + ec.message());
    }
    const fs::path dir(directory);
    const json doc{{"config", config}, {"report", to_json(report)}, {"invariants", to_json(snaps)}};
    write_text((dir / "report.json").string(), doc.dump(2) + "\n");
    write_text((dir / "timings.json").string(), json(report.timings).dump(2) + "\n");
    write_text((dir / "spectrum_g.csv").string(), spectrum_csv(report.spectrum_g.values));
    write_text((dir / "spectrum_a.csv").string(), spectrum_csv(report.independence.spectrum));
    const auto labels = report.basis.term_labels(report.variables);
    write_text((dir / "theta_stage1.csv").string(), theta_csv(report.stage1.theta, labels));
    write_text((dir / "theta_stage2.csv").string(), theta_csv(report.stage2.theta, labels));
    write_text((dir / "theta_stage3.csv").string(), theta_csv(report.stage3.theta, labels));
    std::string formulas;
    for (const auto& s : snaps) {
        formulas += s.formula + "\n";
    }
    write_text((dir / "formulas.txt").string(), formulas);
}

}  // namespace sid
