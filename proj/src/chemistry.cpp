#include "sid/chemistry.hpp"

#include <cmath>

#include "sid/errors.hpp"

namespace sid::chem {

RateConstants default_rates() {
    return {0.5, 22.179, 26.937, 0.015, 0.022, 13844.97, 12652.43, 15454.98, 0.0003, 2492.71};
}

std::vector<std::string> species_names(int n_species) {
    std::vector<std::string> names{"O3", "NO", "NO2", "HCHO", "HO2", "HO2H",
                                   "OH", "O",  "HNO3", "CO",  "H2"};
    if (n_species == kSpecies12) {
        names.emplace_back("H2O");
    } else if (n_species != kSpecies) {
        throw DomainError("chemistry model has 11 or 12 species");
    }
    return names;
}

Eigen::MatrixXi stoichiometry() {
    Eigen::MatrixXi b(kSpecies, kReactions);
    // clang-format off
    b <<  0,  1, -1,  0,  0,  0,  0,  0,  0,  0,   // O3
          1,  0, -1,  0,  0,  0, -1,  0,  0,  0,   // NO
         -1,  0,  1,  0,  0,  0,  1, -1,  0,  0,   // NO2
          0,  0,  0, -1, -1, -1,  0,  0,  0,  0,   // HCHO
          0,  0,  0,  2,  0,  1, -1,  0,  0,  1,   // HO2
          0,  0,  0,  0,  0,  0,  0,  0, -1, -1,   // HO2H
          0,  0,  0,  0,  0, -1,  1, -1,  2, -1,   // OH
          1, -1,  0,  0,  0,  0,  0,  0,  0,  0,   // O
          0,  0,  0,  0,  0,  0,  0,  1,  0,  0,   // HNO3
          0,  0,  0,  1,  1,  1,  0,  0,  0,  0,   // CO
          0,  0,  0,  0,  1,  0,  0,  0,  0,  0;   // H2
    // clang-format on
    return b;
}

Eigen::MatrixXi reactant_orders() {
    Eigen::MatrixXi r = Eigen::MatrixXi::Zero(kSpecies, kReactions);
    r(NO2, 0) = 1;                   // NO2 -> NO + O
    r(O, 1) = 1;                     // O (+ O2) -> O3
    r(O3, 2) = 1, r(NO, 2) = 1;      // O3 + NO -> NO2
    r(HCHO, 3) = 1;                  // HCHO -> 2 HO2 + CO
    r(HCHO, 4) = 1;                  // HCHO -> H2 + CO
    r(HCHO, 5) = 1, r(OH, 5) = 1;    // HCHO + OH -> HO2 + CO
    r(HO2, 6) = 1, r(NO, 6) = 1;     // HO2 + NO -> OH + NO2
    r(NO2, 7) = 1, r(OH, 7) = 1;     // NO2 + OH -> HNO3
    r(HO2H, 8) = 1;                  // HO2H -> 2 OH
    r(HO2H, 9) = 1, r(OH, 9) = 1;    // HO2H + OH -> HO2
    return r;
}

Eigen::VectorXi carbon_counts() {
    Eigen::VectorXi c = Eigen::VectorXi::Zero(kSpecies);
    c[HCHO] = 1;
    c[CO] = 1;
    return c;
}

Eigen::VectorXi nitrogen_counts() {
    Eigen::VectorXi n = Eigen::VectorXi::Zero(kSpecies);
    n[NO] = 1;
    n[NO2] = 1;
    n[HNO3] = 1;
    return n;
}

Eigen::VectorXi hydrogen_counts(int n_species) {
    if (n_species != kSpecies && n_species != kSpecies12) {
        throw DomainError("chemistry model has 11 or 12 species");
    }
    Eigen::VectorXi h = Eigen::VectorXi::Zero(n_species);
    h[HCHO] = 2;
    h[HO2] = 1;
    h[HO2H] = 2;
    h[OH] = 1;
    h[HNO3] = 1;
    h[H2] = 2;
    if (n_species == kSpecies12) {
        h[H2O] = 2;
    }
    return h;
}

Eigen::MatrixXi stoichiometry_12() {
    const Eigen::MatrixXi b11 = stoichiometry();
    const Eigen::RowVectorXi imbalance = hydrogen_counts().transpose() * b11;
    Eigen::MatrixXi b(kSpecies12, kReactions);
    b.topRows(kSpecies) = b11;
    for (int j = 0; j < kReactions; ++j) {
        if (imbalance[j] % 2 != 0) {
            throw DomainError("reaction R" + std::to_string(j + 1) +
                              " has an odd hydrogen imbalance; H2O stoichiometry is not integral");
        }
        b(H2O, j) = -imbalance[j] / 2;
    }
    return b;
}

void check_concentrations(const Vector& c) {
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        if (!std::isfinite(c[i]) || c[i] < 0.0) {
            throw DomainError("concentration " + std::to_string(i) + " is negative or not finite (" +
                              std::to_string(c[i]) + ")");
        }
    }
}

namespace {

void check_length(const Vector& c, int n) {
    if (c.size() != n) {
        throw DimensionError("concentration vector has length " + std::to_string(c.size()) +
                             ", expected " + std::to_string(n));
    }
}

}  // namespace

Vector reaction_rates(const Vector& c, const RateConstants& k) {
    if (c.size() != kSpecies && c.size() != kSpecies12) {
        throw DimensionError("concentration vector must have 11 or 12 entries");
    }
    check_concentrations(c);
    static const Eigen::MatrixXi orders = reactant_orders();
    Vector r(kReactions);
    for (int j = 0; j < kReactions; ++j) {
        double v = k[static_cast<std::size_t>(j)];
        for (int i = 0; i < kSpecies; ++i) {
            for (int p = 0; p < orders(i, j); ++p) {
                v *= c[i];
            }
        }
        r[j] = v;
    }
    return r;
}

Vector explicit_field(const Vector& c, const RateConstants& k) {
    check_length(c, kSpecies);
    check_concentrations(c);
    const auto [k1, k2, k3, k4, k5, k6, k7, k8, k9, k10] = k;
    Vector d(kSpecies);
    d[O3] = k2 * c[O] - k3 * c[O3] * c[NO];
    d[NO] = k1 * c[NO2] - k3 * c[O3] * c[NO] - k7 * c[NO] * c[HO2];
    d[NO2] = -k1 * c[NO2] + k3 * c[O3] * c[NO] + k7 * c[NO] * c[HO2] - k8 * c[NO2] * c[OH];
    d[HCHO] = -k4 * c[HCHO] - k5 * c[HCHO] - k6 * c[HCHO] * c[OH];
    d[HO2] = 2 * k4 * c[HCHO] + k6 * c[HCHO] * c[OH] - k7 * c[NO] * c[HO2] +
             k10 * c[HO2H] * c[OH];
    d[HO2H] = -k9 * c[HO2H] - k10 * c[HO2H] * c[OH];
    d[OH] = -k6 * c[HCHO] * c[OH] + k7 * c[NO] * c[HO2] - k8 * c[NO2] * c[OH] +
            2 * k9 * c[HO2H] - k10 * c[HO2H] * c[OH];
    d[O] = k1 * c[NO2] - k2 * c[O];
    d[HNO3] = k8 * c[NO2] * c[OH];
    d[CO] = k4 * c[HCHO] + k5 * c[HCHO] + k6 * c[HCHO] * c[OH];
    d[H2] = k5 * c[HCHO];
    return d;
}

Vector mass_action_field(const Eigen::MatrixXi& b, const Vector& c, const RateConstants& k) {
    check_length(c, static_cast<int>(b.rows()));
    return b.cast<double>() * reaction_rates(c, k);
}

Vector pssa_fill(const Vector& c, const RateConstants& k) {
    if (c.size() != kSpecies && c.size() != kSpecies12) {
        throw DimensionError("concentration vector must have 11 or 12 entries");
    }
    check_concentrations(c);
    const auto [k1, k2, k3, k4, k5, k6, k7, k8, k9, k10] = k;
    if (!(k2 > 0.0)) {
        throw PssaSingularError("PSSA for O requires k2 > 0");
    }
    const double den = k6 * c[HCHO] + k8 * c[NO2] + k10 * c[HO2H];
    if (!(den > 0.0)) {
        throw PssaSingularError("PSSA denominator for OH is zero (HCHO, NO2 and HO2H all vanish)");
    }
    Vector out = c;
    out[O] = k1 * c[NO2] / k2;
    out[OH] = (k7 * c[NO] * c[HO2] + 2 * k9 * c[HO2H]) / den;
    return out;
}

Vector pssa_field(const Vector& c, const RateConstants& k) {
    const Vector filled = pssa_fill(c, k);
    Vector d = filled.size() == kSpecies ? explicit_field(filled, k) : field_12(filled, k);
    d[O] = 0.0;
    d[OH] = 0.0;
    return d;
}

Vector field_12(const Vector& c, const RateConstants& k) {
    static const Eigen::MatrixXi b = stoichiometry_12();
    return mass_action_field(b, c, k);
}

namespace {

Polynomial linear(const Eigen::VectorXd& w) {
    const int n = static_cast<int>(w.size());
    Polynomial p(n);
    for (int i = 0; i < n; ++i) {
        if (w[i] != 0.0) {
            p += w[i] * Polynomial::variable(n, i);
        }
    }
    return p;
}

Eigen::VectorXd padded(const Eigen::VectorXi& v, int n) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    out.head(v.size()) = v.cast<double>();
    return out;
}

}  // namespace

Polynomial carbon_balance(int n_species) {
    species_names(n_species);
    return linear(padded(carbon_counts(), n_species));
}

Polynomial nitrogen_balance(int n_species) {
    species_names(n_species);
    return linear(padded(nitrogen_counts(), n_species));
}

Polynomial hydrogen_balance() { return linear(hydrogen_counts(kSpecies12).cast<double>()); }

Polynomial third_invariant(const RateConstants& k, int n_species) {
    species_names(n_species);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n_species);
    w.head(kSpecies) << 6, -5, 1, 3, 9, 6, 3, 6, 4, -3, 0;
    // Reactions 4 and 5 share the rate monomial C_HCHO; the H2 weight balances
    // the HO2 and CO terms they produce.
    w[H2] = 6.0 - 12.0 * k[3] / k[4];
    return linear(w);
}

}  // namespace sid::chem
