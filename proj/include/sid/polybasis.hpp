#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sid/types.hpp"

namespace sid {

using Exponents = std::vector<int>;

inline constexpr std::size_t kDefaultTermCap = 50'000;

/// Ordered set of multivariate monomials b_1(x) ... b_K(x) with no constant
/// term. Immutable once constructed.
class MonomialBasis {
public:
    /// Validates the terms: each must have length `dimension`, nonnegative
    /// entries, total degree >= 1, and no duplicates.
    MonomialBasis(int dimension, std::vector<Exponents> terms);

    int dimension() const noexcept { return dimension_; }
    int max_degree() const noexcept { return max_degree_; }
    std::size_t size() const noexcept { return terms_.size(); }

    const Exponents& term(std::size_t i) const { return terms_.at(i); }
    std::span<const Exponents> terms() const noexcept { return terms_; }
    int degree(std::size_t i) const;

    std::optional<std::size_t> index_of(const Exponents& e) const;

    /// b(x), length K.
    Vector evaluate(const Vector& x) const;

    /// Jacobian of b at x, K x d.
    Matrix gradient(const Vector& x) const;

    /// (grad b(x)) v, length K, without materialising the Jacobian.
    Vector directional_derivative(const Vector& x, const Vector& v) const;

    /// Gradient of H(x) = theta . b(x) for each column of `thetas`, d x M.
    Matrix combination_gradient(const Vector& x, const Matrix& thetas) const;

    /// Human-readable monomial such as "xyz", "x^2" or "O3*NO".
    std::string term_label(std::size_t i, std::span<const std::string> names) const;
    std::vector<std::string> term_labels(std::span<const std::string> names) const;

    nlohmann::json to_json() const;
    static MonomialBasis from_json(const nlohmann::json& j);

    friend bool operator==(const MonomialBasis& a, const MonomialBasis& b) {
        return a.dimension_ == b.dimension_ && a.terms_ == b.terms_;
    }

private:
    struct Factor {
        int var;
        int power;
    };

    void check_point(const Vector& x) const;
    Matrix power_table(const Vector& x) const;

    int dimension_;
    int max_degree_ = 0;
    std::vector<Exponents> terms_;
    std::vector<std::vector<Factor>> factors_;
    std::map<Exponents, std::size_t> index_;
};

/// Every monomial with 1 <= total degree <= n in graded lexicographic order:
/// degree ascending, and within a degree x_1 is preferred over x_2 and so on
/// (x^2, xy, xz, y^2, ...).
MonomialBasis enumerate_monomials(int d, int n, std::size_t cap = kDefaultTermCap);

/// C(d+n, n) - 1 computed without overflow for the sizes used here.
std::size_t monomial_count(int d, int n);

}  // namespace sid
