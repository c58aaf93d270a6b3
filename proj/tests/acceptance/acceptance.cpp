// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "sid/chemistry.hpp"
#include "sid/detector.hpp"
#include "sid/fluid.hpp"
#include "sid/report.hpp"
#include "sid/simulate.hpp"

using namespace sid;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "[miss] ";
        }
        detail << what << "; ";
    }
    void note(const std::string& what) { detail << what << "; "; }
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

Matrix orthonormal_basis(const Matrix& a) {
    Eigen::HouseholderQR<Matrix> qr(a);
    return qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
}

// Largest relative distance of a column of `a` from span(b).
double span_residual(const Matrix& a, const Matrix& b) {
    const Matrix q = orthonormal_basis(b);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        worst = std::max(worst, project_onto_nullspace(a.col(j), q));
    }
    return worst;
}

Matrix catalog_columns(const Catalog& cat, const std::vector<std::string>& labels) {
    Matrix out(cat.entries.front().theta.size(), static_cast<Eigen::Index>(labels.size()));
    for (std::size_t j = 0; j < labels.size(); ++j) {
        bool found = false;
        for (const auto& e : cat.entries) {
            if (e.label == labels[j]) {
                out.col(static_cast<Eigen::Index>(j)) = e.theta;
                found = true;
            }
        }
        if (!found) {
            throw std::runtime_error("catalog has no " + labels[j]);
        }
    }
    return out;
}

Matrix hstack(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), a.cols() + b.cols());
    out << a, b;
    return out;
}

DiscoveryReport run(const std::string& name, int degree, bool counts_only = false,
                    std::size_t samples = 0) {
    const auto system = make_system(name);
    DiscoverOptions o;
    o.counts_only = counts_only;
    o.samples = samples;
    return discover(*system, enumerate_monomials(system->dimension(), degree), o);
}

std::string counts_text(const std::vector<std::size_t>& c) {
    std::string s;
    for (std::size_t v : c) {
        s += (s.empty() ? "" : ",") + std::to_string(v);
    }
    return s;
}

std::vector<std::size_t> sweep_counts(const std::string& name, int max_degree,
                                      DiscoveryReport* last = nullptr) {
    std::vector<std::size_t> c;
    for (int n = 1; n <= max_degree; ++n) {
        DiscoveryReport r = run(name, n, true);
        c.push_back(r.c());
        if (last && n == max_degree) {
            *last = std::move(r);
        }
    }
    return c;
}

// Largest |grad H . f| / (|grad H| |f|) over fresh sample states.
double stage3_held_out(const DiscoveryReport& r, const DynamicalSystem& system) {
    const Matrix held = system.sample_states(200, r.seed + 1000003);
    double worst = 0.0;
    for (Eigen::Index p = 0; p < held.rows(); ++p) {
        const Vector x = held.row(p).transpose();
        const Vector f = system.field(x);
        const Matrix grads = r.basis.combination_gradient(x, r.stage3.theta);
        for (Eigen::Index j = 0; j < grads.cols(); ++j) {
            const double denom = grads.col(j).norm() * f.norm();
            if (denom > 0.0) {
                worst = std::max(worst, std::abs(grads.col(j).dot(f)) / denom);
            }
        }
    }
    return worst;
}

// ---- criteria ---------------------------------------------------------------

void lotka_volterra(Outcome& o) {
    const DiscoveryReport r = run("lv3", 3, false, 100);
    o.require(r.m() == 4, "M=" + std::to_string(r.m()));
    o.require(r.c() == 2, "c=" + std::to_string(r.c()));
    const auto system = make_system("lv3");
    const Matrix known = catalog_columns(known_cq_catalog(*system, r.basis), {"x + y + z", "xyz"});
    const double a = span_residual(r.stage3.theta, known);
    const double b = span_residual(known, r.stage3.theta);
    o.require(a < 1e-6 && b < 1e-6, "span residuals " + num(a) + " / " + num(b));
}

void lotka_volterra_sweep(Outcome& o) {
    const auto c = sweep_counts("lv3", 6);
    o.require(c == std::vector<std::size_t>{1, 1, 2, 2, 2, 2}, "c=" + counts_text(c));
}

void fluid_2d(Outcome& o) {
    const auto c = sweep_counts("fluid2d", 4);
    o.require(c == std::vector<std::size_t>{2, 8, 8, 8}, "c=" + counts_text(c));

    const DiscoveryReport r = run("fluid2d", 2);
    int max_degree = 0;
    for (Eigen::Index j = 0; j < r.stage3.theta.cols(); ++j) {
        for (Eigen::Index i = 0; i < r.stage3.theta.rows(); ++i) {
            if (std::abs(r.stage3.theta(i, j)) > 1e-10) {
                max_degree = std::max(max_degree, r.basis.degree(static_cast<std::size_t>(i)));
            }
        }
    }
    o.require(r.stage3.theta.cols() == 8 && max_degree <= 2,
              std::to_string(r.stage3.theta.cols()) + " stage-3 invariants of degree <= " +
                  std::to_string(max_degree));
    const std::set<std::string> wanted{"u_cm", "v_cm", "L_cm", "L", "E", "A", "D", "omega"};
    double worst = 0.0;
    std::size_t seen = 0;
    for (const auto& chk : r.catalog) {
        if (wanted.count(chk.label)) {
            ++seen;
            worst = std::max(worst, chk.projection_residual);
        }
    }
    o.require(seen == wanted.size() && worst < 1e-6,
              std::to_string(seen) + " catalog quantities, max residual " + num(worst));
}

void fluid_3d(Outcome& o) {
    DiscoveryReport r3;
    const auto c = sweep_counts("fluid3d", 3, &r3);
    o.require(c == std::vector<std::size_t>{3, 12, 14}, "c=" + counts_text(c));

    // Stage 2 is out of reach at K=2924 within the budget, so the beyond-expert
    // pair is located through the discovered null space and generic ranks.
    const auto system = make_system("fluid3d");
    const Catalog cat = known_cq_catalog(*system, r3.basis);
    const Matrix expert = catalog_columns(
        cat, {"u_cm", "v_cm", "w_cm", "L_x", "L_y", "L_z", "E", "V", "D", "C1", "C2", "C3"});
    const Matrix lcm = catalog_columns(cat, {"Lcm_x", "Lcm_y", "Lcm_z"});
    const Matrix points = system->sample_states(200, 7);
    const auto rank = [&](const Matrix& t) { return count_independent(t, r3.basis, points).c; };
    const std::size_t r_expert = rank(expert);
    const std::size_t r_with_lcm = rank(hstack(expert, lcm));
    const std::size_t r_all = rank(hstack(hstack(r3.stage1.theta, expert), lcm));
    const double lcm_residual = span_residual(lcm, r3.stage1.theta);
    o.require(r_expert == 12, "rank(expert)=" + std::to_string(r_expert));
    o.require(lcm_residual < 1e-6, "L_cm in null space, residual " + num(lcm_residual));
    o.require(r_with_lcm == 14 && r_all == 14,
              "rank(expert + L_cm)=" + std::to_string(r_with_lcm) +
                  ", rank(null space + expert + L_cm)=" + std::to_string(r_all));
}

void fluid_identities(Outcome& o) {
    const auto r = fluid_identity_check(1000, 2024);
    o.require(r.corrected_2d < 1e-8, "2D relation with IK sign corrected " + num(r.corrected_2d));
    o.require(r.circulation_3d < 1e-8, "circulation sum " + num(r.circulation_3d));
    o.note("2D relation as printed " + num(r.literal_2d));
}

bool same_vector(const Vector& a, const Vector& b) {
    return a.size() == b.size() && (a - b).cwiseAbs().maxCoeff() == 0.0;
}

const Vector& published_cq3() {
    static const Vector v = [] {
        Vector p(chem::kSpecies);
        p << 0.370, -0.310, 0.061, 0.185, 0.555, 0.370, 0.185, 0.370, 0.247, -0.185, -0.135;
        return p;
    }();
    return v;
}

void chemistry_discovery(Outcome& o) {
    const auto system = make_system("ozone11");
    const DiscoveryReport r = run("ozone11", 1);
    o.require(r.c() == 3, "c=" + std::to_string(r.c()));
    const auto snaps = snap_stage3(r, *system, system->sample_states(200, 99));
    const Vector hc = *chem::carbon_balance().coefficients_in(r.basis);
    const Vector hn = *chem::nitrogen_balance().coefficients_in(r.basis);
    bool got_c = false;
    bool got_n = false;
    double cq3 = 0.0;
    for (const auto& s : snaps) {
        if (same_vector(s.snap.snapped, hc)) {
            got_c = true;
        } else if (same_vector(s.snap.snapped, hn)) {
            got_n = true;
        } else {
            cq3 = std::max(cq3, std::abs(cosine_similarity(s.snap.original, published_cq3())));
        }
    }
    o.require(got_c && got_n, std::string("H_C ") + (got_c ? "exact" : "missing") + ", H_N " +
                                  (got_n ? "exact" : "missing"));
    o.require(cq3 > 0.999, "CQ3 cosine with the published row " + num(cq3));
    const DiscoveryReport p = run("ozone11-pssa", 1, true);
    o.note("PSSA-state sampling gives M=" + std::to_string(p.m()) + ", c=" + std::to_string(p.c()));
}

struct Fractions {
    double hc, hn, cq3, cq3_int;
    std::size_t failures;
};

Fractions chemistry_fractions(const std::string& model, const DiscoveryReport& r) {
    const auto system = make_system(model);
    const auto labels = match_catalog(r.stage3.theta, known_cq_catalog(*make_system("ozone11"), r.basis));
    Matrix thetas(r.basis.size(), 4);
    std::vector<std::string> names(4);
    for (Eigen::Index j = 0; j < r.stage3.theta.cols(); ++j) {
        const auto& l = labels[static_cast<std::size_t>(j)];
        const Eigen::Index slot = l == "H_C" ? 0 : l == "H_N" ? 1 : 2;
        thetas.col(slot) = r.stage3.theta.col(j);
        if (slot == 2) {
            thetas.col(3) = round_rational(r.stage3.theta.col(j), 1).snapped;
        }
    }
    MonteCarloOptions mc;
    mc.n_cases = 100;
    const auto res = monte_carlo_validate(*system, thetas, r.basis, {"H_C", "H_N", "CQ3", "CQ3 int"},
                                          {1e-6, 1e-6, 1e-3, 1e-3}, mc);
    return {res.pass_fraction[0], res.pass_fraction[1], res.pass_fraction[2], res.pass_fraction[3],
            res.failures.size()};
}

void chemistry_validation(Outcome& o) {
    const DiscoveryReport r = run("ozone11", 1);
    const Fractions f = chemistry_fractions("ozone11-pssa", r);
    o.require(f.failures == 0, std::to_string(f.failures) + " failed integrations");
    o.require(f.hc == 1.0 && f.hn == 1.0, "H_C " + num(f.hc) + ", H_N " + num(f.hn));
    o.require(f.cq3 >= 0.95, "CQ3 unsnapped " + num(f.cq3));
    o.require(f.cq3_int < f.cq3, "CQ3 integer-snapped " + num(f.cq3_int));
    const Fractions full = chemistry_fractions("ozone11", r);
    o.note("full-field model: H_C " + num(full.hc) + ", H_N " + num(full.hn) + ", CQ3 " +
           num(full.cq3) + ", CQ3 integer " + num(full.cq3_int));
}

void hydrogen_experiment(Outcome& o) {
    const DiscoveryReport r = run("ozone12", 1);
    o.require(r.c() == 4, "c=" + std::to_string(r.c()));
    const Vector hh = *chem::hydrogen_balance().coefficients_in(r.basis);
    double best = 0.0;
    for (Eigen::Index j = 0; j < r.stage3.theta.cols(); ++j) {
        best = std::max(best, std::abs(cosine_similarity(r.stage3.theta.col(j), hh)));
    }
    o.require(best > 0.99, "best stage-3 cosine with H_H " + num(best));
    o.note("H_H distance from the discovered span " + num(span_residual(hh, r.stage1.theta)));
}

void property_suites(Outcome& o) {
    // Basis gradients against central differences.
    {
        const auto basis = enumerate_monomials(4, 4);
        std::mt19937_64 rng(3);
        std::normal_distribution<double> n(0.0, 1.0);
        double worst = 0.0;
        for (int t = 0; t < 20; ++t) {
            Vector x(4);
            for (int i = 0; i < 4; ++i) {
                x[i] = n(rng);
            }
            const Matrix j = basis.gradient(x);
            for (int v = 0; v < 4; ++v) {
                const double h = 1e-5;
                const Vector e = Vector::Unit(4, v);
                const Vector fd = (basis.evaluate(x + h * e) - basis.evaluate(x - h * e)) / (2 * h);
                for (Eigen::Index k = 0; k < fd.size(); ++k) {
                    worst = std::max(worst, std::abs(fd[k] - j(k, v)) / std::max(1.0, std::abs(j(k, v))));
                }
            }
        }
        o.require(worst < 1e-6, "gradient finite differences " + num(worst));
    }

    double ortho = 0.0;
    bool monotone = true;
    double held_out = 0.0;
    for (const auto& [name, degree] : std::vector<std::pair<std::string, int>>{
             {"lv3", 3}, {"fluid2d", 2}, {"ozone11", 1}, {"ozone12", 1}}) {
        const auto system = make_system(name);
        const DiscoveryReport r = run(name, degree);
        for (const Matrix* t : {&r.stage1.theta, &r.stage2.theta}) {
            const Matrix gram = t->transpose() * *t;
            ortho = std::max(ortho, (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff());
        }
        for (std::size_t i = 1; i < r.sparsify_history.size(); ++i) {
            monotone = monotone && r.sparsify_history[i] <= r.sparsify_history[i - 1] * (1 + 1e-12);
        }
        held_out = std::max(held_out, stage3_held_out(r, *system));
    }
    o.require(ortho < 1e-10, "orthonormality " + num(ortho));
    o.require(monotone, std::string("L1 history ") + (monotone ? "monotone" : "increases"));
    o.require(held_out < 1e-6, "held-out conservation " + num(held_out));

    const auto a = to_json(run("fluid2d", 2)).dump();
    const auto b = to_json(run("fluid2d", 2)).dump();
    o.require(a == b, std::string("reports ") + (a == b ? "identical" : "differ") + " across runs");

    const DiscoveryReport h = run("harmonic", 4);
    o.require(h.m() == 2 && h.c() == 1,
              "harmonic M=" + std::to_string(h.m()) + ", c=" + std::to_string(h.c()));
}

struct Criterion {
    int id;
    std::string title;
    double budget_s;
    std::function<void(Outcome&)> check;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "Lotka-Volterra degree 3", 5.0, lotka_volterra},
        {2, "Lotka-Volterra basis sweep", 120.0, lotka_volterra_sweep},
        {3, "Fluid 2D", 120.0, fluid_2d},
        {4, "Fluid 3D", 900.0, fluid_3d},
        {5, "Fluid identities", 5.0, fluid_identities},
        {6, "Chemistry discovery", 120.0, chemistry_discovery},
        {7, "Chemistry validation", 300.0, chemistry_validation},
        {8, "Hydrogen experiment", 120.0, hydrogen_experiment},
        {9, "Property suites", 600.0, property_suites},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome o;
        const auto start = std::chrono::steady_clock::now();
        try {
            c.check(o);
        } catch (const std::exception& e) {
            o.require(false, std::string("error: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        o.require(secs < c.budget_s, "runtime " + num(secs) + " s (limit " + num(c.budget_s) + " s)");
        failed += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << c.id << ": " << c.title << "  "
                  << o.detail.str() << std::endl;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
              << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
