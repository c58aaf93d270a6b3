#include "sid/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sid/errors.hpp"

namespace sid {

Polynomial Polynomial::variable(int dimension, int index) {
    if (index < 0 || index >= dimension) {
        throw DimensionError("variable index out of range");
    }
    Polynomial p(dimension);
    Exponents e(static_cast<std::size_t>(dimension), 0);
    e[static_cast<std::size_t>(index)] = 1;
    p.terms_[e] = 1.0;
    return p;
}

Polynomial Polynomial::constant(int dimension, double value) {
    Polynomial p(dimension);
    if (value != 0.0) {
        p.terms_[Exponents(static_cast<std::size_t>(dimension), 0)] = value;
    }
    return p;
}

int Polynomial::degree() const {
    int deg = 0;
    for (const auto& [e, c] : terms_) {
        deg = std::max(deg, std::accumulate(e.begin(), e.end(), 0));
    }
    return deg;
}

double Polynomial::evaluate(const Vector& x) const {
    if (x.size() != dimension_) {
        throw DimensionError("polynomial evaluated at point of wrong length");
    }
    double sum = 0.0;
    for (const auto& [e, c] : terms_) {
        double v = c;
        for (int j = 0; j < dimension_; ++j) {
            for (int p = 0; p < e[static_cast<std::size_t>(j)]; ++p) {
                v *= x[j];
            }
        }
        sum += v;
    }
    return sum;
}

Vector Polynomial::gradient(const Vector& x) const {
    if (x.size() != dimension_) {
        throw DimensionError("polynomial gradient at point of wrong length");
    }
    Vector g = Vector::Zero(dimension_);
    for (const auto& [e, c] : terms_) {
        for (int k = 0; k < dimension_; ++k) {
            const int ek = e[static_cast<std::size_t>(k)];
            if (ek == 0) {
                continue;
            }
            double v = c * ek;
            for (int j = 0; j < dimension_; ++j) {
                const int p = e[static_cast<std::size_t>(j)] - (j == k ? 1 : 0);
                for (int q = 0; q < p; ++q) {
                    v *= x[j];
                }
            }
            g[k] += v;
        }
    }
    return g;
}

std::optional<Vector> Polynomial::coefficients_in(const MonomialBasis& basis) const {
    if (basis.dimension() != dimension_) {
        throw DimensionError("basis dimension differs from polynomial dimension");
    }
    Vector theta = Vector::Zero(static_cast<Eigen::Index>(basis.size()));
    for (const auto& [e, c] : terms_) {
        if (std::accumulate(e.begin(), e.end(), 0) == 0) {
            continue;
        }
        auto idx = basis.index_of(e);
        if (!idx) {
            return std::nullopt;
        }
        theta[static_cast<Eigen::Index>(*idx)] = c;
    }
    return theta;
}

void Polynomial::add_term(const Exponents& e, double c) {
    terms_[e] += c;
}

// Drops exact zeros and round-off leftovers from cancelling expansions.
void Polynomial::prune() {
    double scale = 0.0;
    for (const auto& [e, c] : terms_) {
        scale = std::max(scale, std::abs(c));
    }
    for (auto it = terms_.begin(); it != terms_.end();) {
        if (std::abs(it->second) <= 1e-14 * scale) {
            it = terms_.erase(it);
        } else {
            ++it;
        }
    }
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
    if (o.dimension_ != dimension_) {
        throw DimensionError("adding polynomials of different dimension");
    }
    for (const auto& [e, c] : o.terms_) {
        add_term(e, c);
    }
    prune();
    return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
    if (o.dimension_ != dimension_) {
        throw DimensionError("subtracting polynomials of different dimension");
    }
    for (const auto& [e, c] : o.terms_) {
        add_term(e, -c);
    }
    prune();
    return *this;
}

Polynomial& Polynomial::operator*=(double s) {
    for (auto& [e, c] : terms_) {
        c *= s;
    }
    prune();
    return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.dimension_ != b.dimension_) {
        throw DimensionError("multiplying polynomials of different dimension");
    }
    Polynomial out(a.dimension_);
    for (const auto& [ea, ca] : a.terms_) {
        for (const auto& [eb, cb] : b.terms_) {
            Exponents e(ea.size());
            for (std::size_t j = 0; j < ea.size(); ++j) {
                e[j] = ea[j] + eb[j];
            }
            out.add_term(e, ca * cb);
        }
    }
    out.prune();
    return out;
}

}  // namespace sid
