#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "sid/chemistry.hpp"
#include "sid/errors.hpp"
#include "sid/report.hpp"

using namespace sid;

namespace {

// Smallest |x - p/q| over every q <= max_den, scanning all denominators.
double brute_force_error(double x, long max_den) {
    double best = std::numeric_limits<double>::infinity();
    for (long q = 1; q <= max_den; ++q) {
        const double p = std::round(x * static_cast<double>(q));
        best = std::min(best, std::abs(x - p / static_cast<double>(q)));
    }
    return best;
}

Matrix chemistry_g(std::size_t points) {
    const auto system = make_system("ozone11");
    return build_g_matrix(*system, enumerate_monomials(11, 1), system->sample_states(points, 3));
}

}  // namespace

TEST(BestRational, MatchesBruteForceSearch) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    for (int t = 0; t < 2000; ++t) {
        const double x = u(rng);
        for (long den : {1L, 5L, 12L, 100L}) {
            const Rational r = best_rational(x, den);
            EXPECT_GE(r.den, 1);
            EXPECT_LE(r.den, den);
            EXPECT_NEAR(std::abs(x - r.value()), brute_force_error(x, den), 1e-15) << x << " " << den;
        }
    }
    EXPECT_EQ(best_rational(-24.0 / 11.0, 12), (Rational{-24, 11}));
    EXPECT_EQ(best_rational(-24.0 / 11.0, 1), (Rational{-2, 1}));
    EXPECT_EQ(best_rational(0.0, 12), (Rational{0, 1}));
}

TEST(Snap, RecoversTheChemistryRatios) {
    const auto basis = enumerate_monomials(11, 1);
    const Vector w = *chem::third_invariant(chem::default_rates()).coefficients_in(basis);
    const Matrix g = chemistry_g(200);
    Vector noisy = -0.0617 * w;
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0.0, 1e-11);
    for (Eigen::Index i = 0; i < noisy.size(); ++i) {
        noisy[i] += n(rng);
    }
    const SnapResult s = snap_rational(noisy, g);
    EXPECT_EQ(s.pivot_index, static_cast<std::size_t>(chem::NO2));
    EXPECT_LT((s.snapped - w).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(*s.rational[chem::H2], (Rational{-24, 11}));
    EXPECT_LE(s.residual_after, std::max(10 * s.residual_before, 1e-12));
}

TEST(Snap, RevertsSnapsThatBreakConservation) {
    const auto basis = enumerate_monomials(11, 1);
    const Vector w = *chem::third_invariant(chem::default_rates()).coefficients_in(basis);
    SnapOptions opts;
    opts.max_den = 1;
    opts.entry_tol = 0.25;  // lets -24/11 round to -2
    const SnapResult s = snap_rational(w, chemistry_g(200), opts);
    EXPECT_FALSE(s.accepted[chem::H2]);
    EXPECT_NEAR(s.snapped[chem::H2], -24.0 / 11.0, 1e-14);
    EXPECT_EQ(s.snapped[chem::O3], 6.0);

    const SnapResult forced = round_rational(w, 1);
    EXPECT_EQ(forced.snapped[chem::H2], -2.0);
}

TEST(Snap, ZeroVectorThrows) {
    EXPECT_THROW(snap_rational(Vector::Zero(3), Matrix(0, 3)), DomainError);
}

TEST(Formula, FormatAndParseRoundTrip) {
    const auto basis = enumerate_monomials(3, 3);
    const std::vector<std::string> names{"x", "y", "z"};
    Vector v = Vector::Zero(static_cast<Eigen::Index>(basis.size()));
    v[0] = 1.0;
    v[1] = 1.0;
    v[2] = 1.0;
    EXPECT_EQ(format_formula(v, basis, names), "x + y + z");
    v.setZero();
    v[static_cast<Eigen::Index>(*basis.index_of({1, 1, 1}))] = 1.0;
    EXPECT_EQ(format_formula(v, basis, names), "xyz");
    v[0] = -2.5;
    const std::string text = format_formula(v, basis, names);
    EXPECT_EQ(text, "-2.5*x + xyz");
    EXPECT_EQ(parse_formula(text, basis, names), v);
    EXPECT_EQ(format_formula(Vector::Zero(static_cast<Eigen::Index>(basis.size())), basis, names), "0");
    EXPECT_THROW(parse_formula("w + x", basis, names), DomainError);
}

TEST(Formula, RationalCoefficients) {
    const auto basis = enumerate_monomials(11, 1);
    const auto names = chem::species_names();
    const Vector w = *chem::third_invariant(chem::default_rates()).coefficients_in(basis);
    const SnapResult s = snap_rational(w, Matrix(0, 11));
    const std::string text = format_formula(s.snapped, basis, names, &s.rational);
    EXPECT_EQ(text,
              "6*O3 - 5*NO + NO2 + 3*HCHO + 9*HO2 + 6*HO2H + 3*OH + 6*O + 4*HNO3 - 3*CO - 24/11*H2");
    EXPECT_LT((parse_formula(text, basis, names) - w).norm(), 1e-14);
}

TEST(Catalog, MatchAndCosine) {
    const auto system = make_system("lv3");
    const auto basis = enumerate_monomials(3, 3);
    const Catalog cat = known_cq_catalog(*system, basis);
    Matrix t(basis.size(), 2);
    t.col(0) = -3.0 * cat.entries[1].theta;
    t.col(1) = cat.entries[0].theta + cat.entries[1].theta;
    const auto labels = match_catalog(t, cat);
    EXPECT_EQ(labels[0], cat.entries[1].label);
    EXPECT_EQ(labels[1], "H2");
    EXPECT_NEAR(cosine_similarity(t.col(0), cat.entries[1].theta), -1.0, 1e-15);
}

TEST(ReportJson, RoundTripAndExport) {
    const auto system = make_system("lv3");
    const DiscoveryReport r = discover(*system, enumerate_monomials(3, 3));
    const nlohmann::json j = to_json(r);
    EXPECT_EQ(to_json(report_from_json(j)).dump(), j.dump());
    EXPECT_THROW(report_from_json(nlohmann::json{{"system", "lv3"}}), IoError);

    const auto snaps = snap_stage3(r, *system, system->sample_states(50, 77));
    ASSERT_EQ(snaps.size(), 2u);
    const auto dir = std::filesystem::temp_directory_path() / "sid_report_test";
    std::filesystem::remove_all(dir);
    export_report(r, snaps, nlohmann::json{{"system", "lv3"}}, dir.string());
    for (const char* f : {"report.json", "timings.json", "spectrum_g.csv", "spectrum_a.csv",
                          "theta_stage1.csv", "theta_stage2.csv", "theta_stage3.csv", "formulas.txt"}) {
        EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
    }
    const auto doc = read_json((dir / "report.json").string());
    EXPECT_EQ(doc.at("report").at("counts").at("c"), 2);
    EXPECT_FALSE(doc.at("report").contains("timings"));
    std::filesystem::remove_all(dir);
}
