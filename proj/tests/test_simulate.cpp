#include <gtest/gtest.h>

#include <cstdlib>

#include "sid/chemistry.hpp"
#include "sid/errors.hpp"
#include "sid/fluid.hpp"
#include "sid/simulate.hpp"

using namespace sid;

namespace {

Matrix catalog_matrix(const Catalog& cat) {
    Matrix m(cat.entries.front().theta.size(), static_cast<Eigen::Index>(cat.entries.size()));
    for (std::size_t j = 0; j < cat.entries.size(); ++j) {
        m.col(static_cast<Eigen::Index>(j)) = cat.entries[j].theta;
    }
    return m;
}

// dx/dt = x^2 escapes to infinity at t = 1/x0.
class BlowUp final : public DynamicalSystem {
public:
    std::string name() const override { return "blowup"; }
    std::string description() const override { return "x' = x^2"; }
    int dimension() const override { return 1; }
    std::vector<std::string> variable_names() const override { return {"x"}; }
    Vector field(const Vector& x) const override { return x.cwiseProduct(x); }
    Matrix sample_states(std::size_t count, std::uint64_t) const override {
        return Matrix::Ones(static_cast<Eigen::Index>(count), 1);
    }
    Vector random_initial_state(std::mt19937_64& rng) const override {
        return Vector::Constant(1, rng() % 2 ? 1.0 : 0.01);
    }
    std::vector<KnownQuantity> known_quantities() const override { return {}; }
    double default_horizon() const override { return 2.0; }
};

}  // namespace

TEST(ConservationStats, AnalyticInvariantAndProbe) {
    const auto system = make_system("lv3");
    const auto basis = enumerate_monomials(3, 3);
    Vector x0(3);
    x0 << 1.0, 2.0, 3.0;
    const Trajectory t = simulate(*system, x0, 10.0, 200);
    const Matrix cat = catalog_matrix(known_cq_catalog(*system, basis));
    for (const auto& s : conservation_stats(t, cat, basis)) {
        EXPECT_LT(s.cv, 1e-8);
        EXPECT_FALSE(s.absolute);
    }
    Matrix probe = Matrix::Zero(basis.size(), 2);
    probe(0, 0) = 1.0;  // x alone oscillates
    const auto stats = conservation_stats(t, probe, basis);
    EXPECT_GT(stats[0].cv, 1e-3);
    EXPECT_TRUE(stats[1].absolute);
    EXPECT_EQ(stats[1].cv, 0.0);
}

TEST(ConservationStats, OzoneIsNotConserved) {
    const auto system = make_system("ozone11-pssa");
    const auto basis = enumerate_monomials(11, 1);
    std::mt19937_64 rng(1);
    const Trajectory t = simulate(*system, system->random_initial_state(rng), 20.0, 100);
    Matrix probe = Matrix::Zero(basis.size(), 1);
    probe(chem::NO, 0) = 1.0;
    EXPECT_GT(conservation_stats(t, probe, basis, system.get())[0].cv, 1e-3);
}

TEST(MonteCarlo, ChemistryAtomBalances) {
    const auto system = make_system("ozone11-pssa");
    const auto basis = enumerate_monomials(11, 1);
    const Catalog cat = known_cq_catalog(*system, basis);
    const Matrix thetas = catalog_matrix(cat).leftCols(2);
    MonteCarloOptions o;
    o.n_cases = 20;
    const auto r = monte_carlo_validate(*system, thetas, basis, {"H_C", "H_N"}, {1e-6, 1e-6}, o);
    EXPECT_EQ(r.completed(), 20u);
    EXPECT_EQ(r.pass_fraction, (std::vector<double>{1.0, 1.0}));
    EXPECT_TRUE(r.all_passed());
}

TEST(MonteCarlo, IndependentOfThreadCount) {
    const auto system = make_system("lv3");
    const auto basis = enumerate_monomials(3, 3);
    const Matrix thetas = catalog_matrix(known_cq_catalog(*system, basis));
    MonteCarloOptions o;
    o.n_cases = 12;
    o.seed = 42;
    auto run = [&] {
        return monte_carlo_validate(*system, thetas, basis, {"a", "b"}, {1e-6, 1e-6}, o);
    };
    setenv("SID_THREADS", "1", 1);
    const auto one = run();
    setenv("SID_THREADS", "3", 1);
    const auto three = run();
    unsetenv("SID_THREADS");
    for (std::size_t i = 0; i < o.n_cases; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            EXPECT_EQ(one.stats[i][j].cv, three.stats[i][j].cv);
        }
    }
}

TEST(MonteCarlo, FailedCasesAreRecorded) {
    const BlowUp system;
    const auto basis = enumerate_monomials(1, 1);
    MonteCarloOptions o;
    o.n_cases = 16;
    const auto r = monte_carlo_validate(system, Matrix::Ones(1, 1), basis, {"x"}, {1.0}, o);
    EXPECT_GT(r.failures.size(), 0u);
    EXPECT_LT(r.failures.size(), 16u);
    EXPECT_EQ(r.completed() + r.failures.size(), 16u);
    EXPECT_THROW(monte_carlo_validate(system, Matrix::Ones(1, 1), basis, {"x"}, {1.0, 2.0}, o),
                 DimensionError);
}

TEST(FluidTrajectories, AreaVolumeAndEnergyAreConserved) {
    for (const char* name : {"fluid2d", "fluid3d"}) {
        const auto system = make_system(name);
        std::mt19937_64 rng(5);
        const Trajectory t = simulate(*system, system->random_initial_state(rng), 1.0, 100);
        const bool two_d = std::string(name) == "fluid2d";
        const auto qs = two_d ? fluid::quantities_2d() : fluid::quantities_3d();
        const std::string measure = two_d ? "A" : "V";
        for (const auto& q : qs) {
            if (q.name != measure && q.name != "E") {
                continue;
            }
            Vector h(t.states.rows());
            for (Eigen::Index r = 0; r < h.size(); ++r) {
                h[r] = q.poly.evaluate(t.states.row(r).transpose());
            }
            const double mean = h.mean();
            const double sd = std::sqrt((h.array() - mean).square().mean());
            EXPECT_LT(sd / std::abs(mean), 1e-6) << name << " " << q.name;
        }
    }
}
