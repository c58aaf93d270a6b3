#include <gtest/gtest.h>

#include <functional>
#include <random>

#include <nlohmann/json.hpp>

#include "sid/errors.hpp"
#include "sid/polybasis.hpp"

using namespace sid;

namespace {

Vector random_vector(int d, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    Vector x(d);
    for (int i = 0; i < d; ++i) {
        x[i] = u(rng);
    }
    return x;
}

// Counts exponent tuples of total degree 1..n by direct recursion.
std::size_t brute_force_count(int d, int n) {
    std::size_t count = 0;
    std::function<void(int, int)> rec = [&](int var, int remaining) {
        if (var == d) {
            if (remaining < n) {
                ++count;
            }
            return;
        }
        for (int p = 0; p <= remaining; ++p) {
            rec(var + 1, remaining - p);
        }
    };
    rec(0, n);
    return count;
}

}  // namespace

TEST(MonomialCount, MatchesBruteForce) {
    for (auto [d, n] : std::vector<std::pair<int, int>>{{1, 1}, {3, 3}, {3, 6}, {11, 1}, {12, 3}, {24, 2}}) {
        EXPECT_EQ(monomial_count(d, n), brute_force_count(d, n)) << d << " " << n;
        EXPECT_EQ(enumerate_monomials(d, n).size(), brute_force_count(d, n));
    }
    EXPECT_EQ(monomial_count(24, 2), 324u);
    EXPECT_EQ(monomial_count(3, 3), 19u);
}

TEST(EnumerateMonomials, GradedLexOrder) {
    const auto basis = enumerate_monomials(3, 2);
    const std::vector<std::string> names{"x", "y", "z"};
    const std::vector<std::string> expected{"x", "y", "z", "x^2", "xy", "xz", "y^2", "yz", "z^2"};
    EXPECT_EQ(basis.term_labels(names), expected);
    EXPECT_EQ(basis.max_degree(), 2);
    EXPECT_EQ(basis.degree(4), 2);
}

TEST(EnumerateMonomials, CapIsEnforced) {
    EXPECT_THROW(enumerate_monomials(24, 4, 1000), SizeLimitError);
    EXPECT_THROW(enumerate_monomials(0, 2), DomainError);
}

TEST(MonomialBasis, RejectsInvalidTerms) {
    EXPECT_THROW(MonomialBasis(2, {{1, 0}, {1, 0}}), Error);
    EXPECT_THROW(MonomialBasis(2, {{1}}), Error);
    EXPECT_THROW(MonomialBasis(2, {{-1, 2}}), Error);
    EXPECT_THROW(MonomialBasis(2, {{0, 0}}), Error);
}

TEST(MonomialBasis, EvaluateMatchesDirectProducts) {
    const MonomialBasis basis(3, {{1, 1, 1}, {2, 0, 1}, {0, 3, 0}});
    Vector x(3);
    x << 1.5, -2.0, 0.5;
    const Vector b = basis.evaluate(x);
    EXPECT_DOUBLE_EQ(b[0], 1.5 * -2.0 * 0.5);
    EXPECT_DOUBLE_EQ(b[1], 1.5 * 1.5 * 0.5);
    EXPECT_DOUBLE_EQ(b[2], -8.0);
    EXPECT_THROW(basis.evaluate(Vector::Zero(2)), DimensionError);
}

TEST(MonomialBasis, GradientMatchesFiniteDifferences) {
    std::mt19937_64 rng(7);
    const auto basis = enumerate_monomials(4, 4);
    for (int trial = 0; trial < 20; ++trial) {
        const Vector x = random_vector(4, rng);
        const Matrix g = basis.gradient(x);
        const double h = 1e-6;
        for (int j = 0; j < 4; ++j) {
            Vector xp = x;
            Vector xm = x;
            xp[j] += h;
            xm[j] -= h;
            const Vector fd = (basis.evaluate(xp) - basis.evaluate(xm)) / (2 * h);
            for (std::size_t i = 0; i < basis.size(); ++i) {
                const double scale = std::max(1.0, std::abs(g(i, j)));
                EXPECT_LT(std::abs(fd[i] - g(i, j)) / scale, 1e-6);
            }
        }
    }
}

TEST(MonomialBasis, DirectionalAndCombinationGradients) {
    std::mt19937_64 rng(3);
    const auto basis = enumerate_monomials(5, 3);
    const Vector x = random_vector(5, rng);
    const Vector v = random_vector(5, rng);
    const Matrix g = basis.gradient(x);
    EXPECT_LT((basis.directional_derivative(x, v) - g * v).norm(), 1e-12 * (1 + (g * v).norm()));

    Matrix thetas(basis.size(), 3);
    for (Eigen::Index c = 0; c < 3; ++c) {
        thetas.col(c) = random_vector(static_cast<int>(basis.size()), rng);
    }
    const Matrix expected = g.transpose() * thetas;
    EXPECT_LT((basis.combination_gradient(x, thetas) - expected).norm(), 1e-12 * expected.norm());
}

TEST(MonomialBasis, JsonRoundTrip) {
    const auto basis = enumerate_monomials(3, 3);
    const auto back = MonomialBasis::from_json(basis.to_json());
    EXPECT_EQ(basis, back);
    EXPECT_EQ(back.index_of({1, 1, 1}), basis.index_of({1, 1, 1}));
    EXPECT_FALSE(back.index_of({4, 0, 0}).has_value());
}

TEST(MonomialBasis, LabelsWithMultiLetterNames) {
    const MonomialBasis basis(2, {{1, 1}, {2, 0}});
    const std::vector<std::string> names{"O3", "NO"};
    EXPECT_EQ(basis.term_label(0, names), "O3*NO");
    EXPECT_EQ(basis.term_label(1, names), "O3^2");
}
