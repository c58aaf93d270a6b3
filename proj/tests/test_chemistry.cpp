#include <gtest/gtest.h>

#include <random>

#include "sid/chemistry.hpp"
#include "sid/errors.hpp"

using namespace sid;
using namespace sid::chem;

namespace {

Vector random_concentrations(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 0.1);
    Vector c(n);
    for (int i = 0; i < n; ++i) {
        c[i] = u(rng);
    }
    return c;
}

}  // namespace

TEST(Chemistry, ExplicitFieldMatchesMassAction) {
    std::mt19937_64 rng(1);
    const auto k = default_rates();
    const Eigen::MatrixXi b = stoichiometry();
    for (int t = 0; t < 1000; ++t) {
        const Vector c = random_concentrations(kSpecies, rng);
        const Vector a = explicit_field(c, k);
        const Vector m = mass_action_field(b, c, k);
        EXPECT_LT((a - m).cwiseAbs().maxCoeff(), 1e-12 * (1 + m.cwiseAbs().maxCoeff()));
    }
}

TEST(Chemistry, AtomCountsAreStoichiometricInvariants) {
    const Eigen::MatrixXi b = stoichiometry();
    EXPECT_TRUE((b.transpose() * carbon_counts()).isZero());
    EXPECT_TRUE((b.transpose() * nitrogen_counts()).isZero());
    const Eigen::MatrixXi b12 = stoichiometry_12();
    EXPECT_TRUE((b12.transpose() * hydrogen_counts(kSpecies12)).isZero());
    EXPECT_TRUE(b12.topRows(kSpecies) == b);
}

TEST(Chemistry, ThirdInvariantIsConservedButNotStoichiometric) {
    std::mt19937_64 rng(2);
    const auto k = default_rates();
    const Polynomial cq3 = third_invariant(k);
    for (int t = 0; t < 200; ++t) {
        const Vector c = random_concentrations(kSpecies, rng);
        const Vector f = explicit_field(c, k);
        const Vector w = cq3.gradient(c);
        EXPECT_LT(std::abs(w.dot(f)), 1e-12 * (w.cwiseAbs().dot(f.cwiseAbs())));
    }
    const auto basis = enumerate_monomials(kSpecies, 1);
    const Vector w = *cq3.coefficients_in(basis);
    EXPECT_GT((stoichiometry().cast<double>().transpose() * w).norm(), 1.0);
}

TEST(Chemistry, ThirdInvariantCoefficients) {
    const auto basis = enumerate_monomials(kSpecies, 1);
    const Vector w = *third_invariant(default_rates()).coefficients_in(basis);
    const std::vector<double> integers{6, -5, 1, 3, 9, 6, 3, 6, 4, -3};
    for (std::size_t i = 0; i < integers.size(); ++i) {
        EXPECT_DOUBLE_EQ(w[static_cast<Eigen::Index>(i)], integers[i]);
    }
    EXPECT_NEAR(w[H2], -24.0 / 11.0, 1e-14);

    // Direction published for the discovered invariant.
    Vector published(kSpecies);
    published << 0.370, -0.310, 0.061, 0.185, 0.555, 0.370, 0.185, 0.370, 0.247, -0.185, -0.135;
    EXPECT_GT(w.dot(published) / (w.norm() * published.norm()), 0.999);
}

TEST(Chemistry, PssaZeroesTheFastRows) {
    std::mt19937_64 rng(3);
    const auto k = default_rates();
    for (int t = 0; t < 100; ++t) {
        const Vector c = pssa_fill(random_concentrations(kSpecies, rng), k);
        const Vector f = explicit_field(c, k);
        // Residual of the balance relative to the largest concentration.
        EXPECT_LT(std::abs(f[O]), 1e-12 * c.maxCoeff());
        EXPECT_LT(std::abs(f[OH]), 1e-12 * c.maxCoeff());
        const Vector p = pssa_field(c, k);
        EXPECT_EQ(p[O], 0.0);
        EXPECT_EQ(p[OH], 0.0);
    }
}

TEST(Chemistry, PssaSingularAndDomainErrors) {
    const auto k = default_rates();
    Vector c = Vector::Zero(kSpecies);
    EXPECT_THROW(pssa_fill(c, k), PssaSingularError);
    c[O3] = -1.0;
    EXPECT_THROW(check_concentrations(c), DomainError);
    EXPECT_THROW(pssa_fill(Vector::Zero(5), k), DimensionError);
}

TEST(Chemistry, TwelveSpeciesConservesHydrogen) {
    std::mt19937_64 rng(4);
    const auto k = default_rates();
    const Polynomial hh = hydrogen_balance();
    for (int t = 0; t < 100; ++t) {
        const Vector c = random_concentrations(kSpecies12, rng);
        const Vector f = field_12(c, k);
        const Vector w = hh.gradient(c);
        EXPECT_LT(std::abs(w.dot(f)), 1e-13 * (1 + w.cwiseAbs().dot(f.cwiseAbs())));
        EXPECT_LT((f.head(kSpecies) - explicit_field(c.head(kSpecies), k)).norm(), 1e-12);
    }
}
