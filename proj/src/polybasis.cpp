#include "sid/polybasis.hpp"

#include <algorithm>
#include <numeric>

#include <nlohmann/json.hpp>

#include "sid/errors.hpp"

namespace sid {

MonomialBasis::MonomialBasis(int dimension, std::vector<Exponents> terms)
    : dimension_(dimension), terms_(std::move(terms)) {
    if (dimension_ < 1) {
        throw DomainError("basis dimension must be positive");
    }
    factors_.reserve(terms_.size());
    for (const auto& e : terms_) {
        if (static_cast<int>(e.size()) != dimension_) {
            throw DimensionError("exponent vector length " + std::to_string(e.size()) +
                                 " does not match dimension " + std::to_string(dimension_));
        }
        int total = 0;
        std::vector<Factor> f;
        for (int j = 0; j < dimension_; ++j) {
            if (e[j] < 0) {
                throw DomainError("negative exponent in monomial");
            }
            if (e[j] > 0) {
                f.push_back({j, e[j]});
            }
            total += e[j];
        }
        if (total == 0) {
            throw DomainError("constant monomial is not allowed in a basis");
        }
        if (!index_.emplace(e, factors_.size()).second) {
            throw DomainError("duplicate monomial in basis");
        }
        max_degree_ = std::max(max_degree_, total);
        factors_.push_back(std::move(f));
    }
}

int MonomialBasis::degree(std::size_t i) const {
    const auto& e = terms_.at(i);
    return std::accumulate(e.begin(), e.end(), 0);
}

std::optional<std::size_t> MonomialBasis::index_of(const Exponents& e) const {
    auto it = index_.find(e);
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

void MonomialBasis::check_point(const Vector& x) const {
    if (x.size() != dimension_) {
        throw DimensionError("point has length " + std::to_string(x.size()) + ", basis expects " +
                             std::to_string(dimension_));
    }
}

// pw(j, p) = x_j^p for p in [0, max_degree].
Matrix MonomialBasis::power_table(const Vector& x) const {
    Matrix pw(dimension_, max_degree_ + 1);
    for (int j = 0; j < dimension_; ++j) {
        pw(j, 0) = 1.0;
        for (int p = 1; p <= max_degree_; ++p) {
            pw(j, p) = pw(j, p - 1) * x[j];
        }
    }
    return pw;
}

Vector MonomialBasis::evaluate(const Vector& x) const {
    check_point(x);
    const Matrix pw = power_table(x);
    Vector out(terms_.size());
    for (std::size_t i = 0; i < factors_.size(); ++i) {
        double v = 1.0;
        for (const auto& f : factors_[i]) {
            v *= pw(f.var, f.power);
        }
        out[static_cast<Eigen::Index>(i)] = v;
    }
    return out;
}

Matrix MonomialBasis::gradient(const Vector& x) const {
    check_point(x);
    const Matrix pw = power_table(x);
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(terms_.size()), dimension_);
    for (std::size_t i = 0; i < factors_.size(); ++i) {
        const auto& fs = factors_[i];
        for (std::size_t a = 0; a < fs.size(); ++a) {
            double v = fs[a].power * pw(fs[a].var, fs[a].power - 1);
            for (std::size_t b = 0; b < fs.size(); ++b) {
                if (b != a) {
                    v *= pw(fs[b].var, fs[b].power);
                }
            }
            out(static_cast<Eigen::Index>(i), fs[a].var) = v;
        }
    }
    return out;
}

Vector MonomialBasis::directional_derivative(const Vector& x, const Vector& v) const {
    check_point(x);
    if (v.size() != dimension_) {
        throw DimensionError("direction has wrong length");
    }
    const Matrix pw = power_table(x);
    Vector out(terms_.size());
    for (std::size_t i = 0; i < factors_.size(); ++i) {
        const auto& fs = factors_[i];
        double sum = 0.0;
        for (std::size_t a = 0; a < fs.size(); ++a) {
            double t = fs[a].power * pw(fs[a].var, fs[a].power - 1) * v[fs[a].var];
            for (std::size_t b = 0; b < fs.size(); ++b) {
                if (b != a) {
                    t *= pw(fs[b].var, fs[b].power);
                }
            }
            sum += t;
        }
        out[static_cast<Eigen::Index>(i)] = sum;
    }
    return out;
}

Matrix MonomialBasis::combination_gradient(const Vector& x, const Matrix& thetas) const {
    check_point(x);
    if (thetas.rows() != static_cast<Eigen::Index>(terms_.size())) {
        throw DimensionError("coefficient matrix row count does not match basis size");
    }
    const Matrix pw = power_table(x);
    const Eigen::Index m = thetas.cols();
    Matrix out = Matrix::Zero(dimension_, m);
    for (std::size_t i = 0; i < factors_.size(); ++i) {
        const auto& fs = factors_[i];
        const auto row = thetas.row(static_cast<Eigen::Index>(i));
        for (std::size_t a = 0; a < fs.size(); ++a) {
            double v = fs[a].power * pw(fs[a].var, fs[a].power - 1);
            for (std::size_t b = 0; b < fs.size(); ++b) {
                if (b != a) {
                    v *= pw(fs[b].var, fs[b].power);
                }
            }
            out.row(fs[a].var) += v * row;
        }
    }
    return out;
}

std::string MonomialBasis::term_label(std::size_t i, std::span<const std::string> names) const {
    if (static_cast<int>(names.size()) != dimension_) {
        throw DimensionError("variable name count does not match basis dimension");
    }
    const bool compact = std::all_of(names.begin(), names.end(),
                                     [](const std::string& s) { return s.size() == 1; });
    std::string out;
    for (const auto& f : factors_.at(i)) {
        if (!out.empty() && !compact) {
            out += '*';
        }
        out += names[static_cast<std::size_t>(f.var)];
        if (f.power > 1) {
            out += '^' + std::to_string(f.power);
        }
    }
    return out;
}

std::vector<std::string> MonomialBasis::term_labels(std::span<const std::string> names) const {
    std::vector<std::string> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) {
        out.push_back(term_label(i, names));
    }
    return out;
}

nlohmann::json MonomialBasis::to_json() const {
    return nlohmann::json{{"d", dimension_}, {"n", max_degree_}, {"terms", terms_}};
}

MonomialBasis MonomialBasis::from_json(const nlohmann::json& j) {
    return MonomialBasis(j.at("d").get<int>(), j.at("terms").get<std::vector<Exponents>>());
}

std::size_t monomial_count(int d, int n) {
    // C(d+n, n) built incrementally; exact for all sizes that fit in 64 bits.
    unsigned long long c = 1;
    for (int i = 1; i <= n; ++i) {
        c = c * static_cast<unsigned long long>(d + i) / static_cast<unsigned long long>(i);
    }
    return static_cast<std::size_t>(c - 1);
}

namespace {

// Appends all exponent vectors of total degree `remaining` over variables
// [var, d) in graded-lex order.
void append_degree(int d, int var, int remaining, Exponents& current,
                   std::vector<Exponents>& out) {
    if (var == d - 1) {
        current[var] = remaining;
        out.push_back(current);
        current[var] = 0;
        return;
    }
    for (int p = remaining; p >= 0; --p) {
        current[var] = p;
        append_degree(d, var + 1, remaining - p, current, out);
    }
    current[var] = 0;
}

}  // namespace

MonomialBasis enumerate_monomials(int d, int n, std::size_t cap) {
    if (d < 1 || n < 1) {
        throw DomainError("enumerate_monomials requires d >= 1 and n >= 1");
    }
    const std::size_t k = monomial_count(d, n);
    if (k > cap) {
        throw SizeLimitError("basis with d=" + std::to_string(d) + ", n=" + std::to_string(n) +
                             " has " + std::to_string(k) + " terms, above the cap of " +
                             std::to_string(cap));
    }
    std::vector<Exponents> terms;
    terms.reserve(k);
    Exponents current(static_cast<std::size_t>(d), 0);
    for (int deg = 1; deg <= n; ++deg) {
        append_degree(d, 0, deg, current, terms);
    }
    return MonomialBasis(d, std::move(terms));
}

}  // namespace sid
