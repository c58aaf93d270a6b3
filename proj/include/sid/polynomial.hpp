#pragma once

#include <map>
#include <optional>
#include <string>

#include "sid/polybasis.hpp"
#include "sid/types.hpp"

namespace sid {

/// Sparse multivariate polynomial with real coefficients. Used to write down
/// reference quantities (energies, areas, circulations, ...) exactly as
/// defined and then map them onto a monomial basis.
class Polynomial {
public:
    explicit Polynomial(int dimension) : dimension_(dimension) {}

    static Polynomial variable(int dimension, int index);
    static Polynomial constant(int dimension, double value);

    int dimension() const noexcept { return dimension_; }
    int degree() const;
    const std::map<Exponents, double>& terms() const noexcept { return terms_; }

    double evaluate(const Vector& x) const;
    Vector gradient(const Vector& x) const;

    /// Coefficient vector in `basis`; the constant part is dropped. Returns
    /// nullopt when some non-constant monomial is missing from the basis.
    std::optional<Vector> coefficients_in(const MonomialBasis& basis) const;

    Polynomial& operator+=(const Polynomial& o);
    Polynomial& operator-=(const Polynomial& o);
    Polynomial& operator*=(double s);

    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator-(Polynomial a) { return a *= -1.0; }
    friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
    friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

private:
    void add_term(const Exponents& e, double c);
    void prune();

    int dimension_;
    std::map<Exponents, double> terms_;
};

}  // namespace sid
