#include "sid/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "sid/errors.hpp"
#include "sid/report.hpp"
#include "sid/simulate.hpp"

namespace sid::cli {

namespace {

using nlohmann::json;

// Held-out states must not coincide with the discovery samples.
std::uint64_t held_out_seed(std::uint64_t seed) { return seed + 0x9E3779B97F4A7C15ULL; }

MonomialBasis make_basis(const DynamicalSystem& system, int degree, const Flags& flags) {
    const std::size_t k = monomial_count(system.dimension(), degree);
    if (k > kLargeBasis && !flags.allow_large) {
        throw SizeLimitError(system.name() + " at degree " + std::to_string(degree) + " has K=" +
                             std::to_string(k) + " terms; pass --allow-large to run it");
    }
    return enumerate_monomials(system.dimension(), degree, std::max(k, kDefaultTermCap));
}

std::filesystem::path ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create " + dir + ": " + ec.message());
    }
    return std::filesystem::path(dir);
}

std::string fixed(double v, int digits) {
    std::ostringstream s;
    s << std::setprecision(digits) << v;
    return s.str();
}

}  // namespace

int list_systems(std::ostream& out) {
    for (const auto& name : system_names()) {
        const auto system = make_system(name);
        out << name << ", d=" << system->dimension()
            << ", known=" << system->known_quantities().size() << "  "
            << system->description() << '\n';
    }
    return kExitOk;
}

int discover(const RunConfig& config, const Flags& flags, std::ostream& out) {
    const auto system = make_system(config.system, config.system_options);
    const MonomialBasis basis = make_basis(*system, config.degree, flags);
    const DiscoveryReport report = discover(*system, basis, discover_options(config));
    const Matrix check = system->sample_states(config.check_samples, held_out_seed(config.seed));
    const auto snaps = snap_stage3(report, *system, check, config.snap);
    export_report(report, snaps, to_json(config), config.out);

    out << config.system << " degree " << config.degree << ": K=" << basis.size()
        << ", P=" << report.samples << '\n';
    out << "M=" << report.m() << ", c=" << report.c() << '\n';
    for (std::size_t j = 0; j < snaps.size(); ++j) {
        out << "  H" << (j + 1) << " = " << snaps[j].formula << '\n';
    }
    for (const auto& c : report.catalog) {
        out << "  catalog " << c.label << ": projection residual "
            << fixed(c.projection_residual, 3) << '\n';
    }
    for (const auto& w : report.warnings) {
        out << "  warning: " << w << '\n';
    }
    out << "wrote " << config.out << '\n';
    return kExitOk;
}

int validate(const RunConfig& config, const std::string& report_path, std::ostream& out) {
    const json doc = read_json(report_path);
    if (!doc.contains("report")) {
        throw IoError(report_path + " has no report section");
    }
    const DiscoveryReport report = report_from_json(doc.at("report"));
    if (report.stage3.theta.cols() == 0) {
        throw IoError(report_path + " holds no stage-3 invariants");
    }
    const auto source = make_system(report.system, config.system_options);
    const std::string model =
        config.validation.system.empty() ? source->validation_system() : config.validation.system;
    const auto system = make_system(model, config.system_options);
    if (system->dimension() != report.basis.dimension()) {
        throw ConfigError("validation model " + model + " does not match the report dimension");
    }

    std::vector<std::string> labels =
        match_catalog(report.stage3.theta, known_cq_catalog(*source, report.basis));
    Matrix thetas = report.stage3.theta;
    const long den = config.validation.snapped_max_den;
    if (den > 0) {
        const Eigen::Index m = thetas.cols();
        thetas.conservativeResize(Eigen::NoChange, 2 * m);
        for (Eigen::Index j = 0; j < m; ++j) {
            thetas.col(m + j) = round_rational(report.stage3.theta.col(j), den).snapped;
            labels.push_back(labels[static_cast<std::size_t>(j)] + " [den<=" +
                             std::to_string(den) + "]");
        }
    }
    std::vector<double> thresholds;
    for (std::size_t j = 0; j < labels.size(); ++j) {
        const std::string& base =
            j < static_cast<std::size_t>(report.stage3.theta.cols())
                ? labels[j]
                : labels[j - static_cast<std::size_t>(report.stage3.theta.cols())];
        const auto it = config.validation.thresholds.find(base);
        thresholds.push_back(it != config.validation.thresholds.end() ? it->second
                                                                      : config.validation.cv_threshold);
    }

    MonteCarloOptions mc;
    mc.n_cases = config.validation.n_cases;
    mc.seed = config.seed;
    mc.horizon = config.validation.horizon;
    mc.points = config.validation.points;
    const MonteCarloResult result =
        monte_carlo_validate(*system, thetas, report.basis, labels, thresholds, mc);

    const auto dir = ensure_dir(config.out);
    std::ostringstream csv;
    csv.imbue(std::locale::classic());
    csv << std::setprecision(17) << "case,invariant,mean,stddev,cv,absolute,passed\n";
    for (std::size_t i = 0; i < result.stats.size(); ++i) {
        for (std::size_t j = 0; j < result.stats[i].size(); ++j) {
            const auto& s = result.stats[i][j];
            csv << i << ",\"" << labels[j] << "\"," << s.mean << ',' << s.stddev << ',' << s.cv
                << ',' << (s.absolute ? 1 : 0) << ',' << (s.cv < thresholds[j] ? 1 : 0) << '\n';
        }
    }
    write_text((dir / "validation_cases.csv").string(), csv.str());

    json failures = json::array();
    for (const auto& f : result.failures) {
        failures.push_back({{"case", f.index}, {"message", f.message}});
    }
    json invariants = json::array();
    bool ok = result.completed() > 0;
    for (std::size_t j = 0; j < labels.size(); ++j) {
        const bool passed = result.pass_fraction[j] >= 1.0;
        ok = ok && passed;
        invariants.push_back({{"label", labels[j]},
                              {"threshold", thresholds[j]},
                              {"pass_fraction", result.pass_fraction[j]},
                              {"max_cv", result.max_cv[j]},
                              {"p95_cv", result.p95_cv[j]},
                              {"passed", passed}});
    }
    const json aggregate{{"report", report_path},
                         {"system", model},
                         {"n_cases", mc.n_cases},
                         {"completed", result.completed()},
                         {"seed", mc.seed},
                         {"invariants", invariants},
                         {"failures", failures}};
    write_text((dir / "validation.json").string(), aggregate.dump(2) + "\n");

    out << "validated " << labels.size() << " invariants on " << model << " over "
        << result.completed() << "/" << mc.n_cases << " cases\n";
    for (std::size_t j = 0; j < labels.size(); ++j) {
        out << "  " << (result.pass_fraction[j] >= 1.0 ? "ok  " : "FAIL") << ' ' << labels[j]
            << ": pass " << fixed(result.pass_fraction[j], 4) << " at cv<"
            << fixed(thresholds[j], 3) << ", max cv " << fixed(result.max_cv[j], 3)
            << ", p95 cv " << fixed(result.p95_cv[j], 3) << '\n';
    }
    for (const auto& f : result.failures) {
        out << "  case " << f.index << " failed: " << f.message << '\n';
    }
    return ok ? kExitOk : kExitThreshold;
}

int sweep(const RunConfig& config, const std::vector<int>& degrees, bool full,
          const Flags& flags, std::ostream& out) {
    const auto system = make_system(config.system, config.system_options);
    DiscoverOptions opts = discover_options(config);
    opts.counts_only = !full;

    json rows = json::array();
    std::ostringstream csv;
    csv << "degree,K,M,c,seconds,error\n";
    out << config.system << " sweep\n";
    out << std::setw(8) << "degree" << std::setw(8) << "K" << std::setw(6) << "M" << std::setw(6)
        << "c" << std::setw(10) << "seconds" << '\n';
    bool ok = true;
    for (int degree : degrees) {
        const auto t0 = std::chrono::steady_clock::now();
        json row{{"degree", degree}};
        try {
            const MonomialBasis basis = make_basis(*system, degree, flags);
            const DiscoveryReport r = discover(*system, basis, opts);
            const double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            row["K"] = basis.size();
            row["M"] = r.m();
            row["c"] = r.c();
            out << std::setw(8) << degree << std::setw(8) << basis.size() << std::setw(6) << r.m()
                << std::setw(6) << r.c() << std::setw(10) << fixed(secs, 3) << '\n';
            csv << degree << ',' << basis.size() << ',' << r.m() << ',' << r.c() << ',' << secs
                << ",\n";
        } catch (const Error& e) {
            ok = false;
            row["error"] = e.what();
            out << std::setw(8) << degree << "  failed: " << e.what() << '\n';
            csv << degree << ",,,,,\"" << e.what() << "\"\n";
        }
        rows.push_back(row);
    }
    const auto dir = ensure_dir(config.out);
    write_text((dir / "sweep.csv").string(), csv.str());
    write_text((dir / "sweep.json").string(),
               json{{"system", config.system}, {"full", full}, {"rows", rows}}.dump(2) + "\n");
    return ok ? kExitOk : kExitNumerical;
}

int simulate(const RunConfig& config, double t_end, std::size_t points, std::ostream& out) {
    const auto system = make_system(config.system, config.system_options);
    std::mt19937_64 rng(config.seed);
    const Vector x0 = system->random_initial_state(rng);
    const double horizon = t_end > 0.0 ? t_end : system->default_horizon();
    const Trajectory traj = sid::simulate(*system, x0, horizon, points);
    const auto dir = ensure_dir(config.out);
    const std::string path = (dir / "trajectory.csv").string();
    write_trajectory_csv(traj, system->variable_names(), path);
    out << "wrote " << traj.times.size() << " states of " << system->name() << " to " << path
        << '\n';
    return kExitOk;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Discovers conserved quantities of polynomial dynamical systems"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    std::string system_name;
    int degree = 0;
    Flags flags;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run configuration");
        sub->add_option("--out", out_dir, "output directory (overrides the config)");
        sub->add_option("--seed", seed, "random seed (overrides the config)");
        sub->add_option("--system", system_name, "system name (overrides the config)");
    };

    auto* list_cmd = app.add_subcommand("list-systems", "list the built-in systems");

    auto* discover_cmd = app.add_subcommand("discover", "run the discovery pipeline");
    common(discover_cmd);
    discover_cmd->add_option("--degree", degree, "basis degree (overrides the config)");
    discover_cmd->add_flag("--allow-large", flags.allow_large, "permit bases above 10000 terms");

    std::string report_path;
    auto* validate_cmd = app.add_subcommand("validate", "Monte Carlo check of a report");
    common(validate_cmd);
    validate_cmd->add_option("--report", report_path, "report.json written by discover")
        ->required();

    std::vector<int> degrees;
    bool full = false;
    auto* sweep_cmd = app.add_subcommand("sweep", "count invariants over basis degrees");
    common(sweep_cmd);
    sweep_cmd->add_option("--degrees", degrees, "degrees to run, ascending")->delimiter(',');
    sweep_cmd->add_flag("--full", full, "run sparsification and selection as well");
    sweep_cmd->add_flag("--allow-large", flags.allow_large, "permit bases above 10000 terms");

    double t_end = 0.0;
    std::size_t points = 200;
    auto* simulate_cmd = app.add_subcommand("simulate", "write one trajectory as CSV");
    common(simulate_cmd);
    simulate_cmd->add_option("--t-end", t_end, "horizon (default: the system's)");
    simulate_cmd->add_option("--points", points, "number of output states");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (list_cmd->parsed()) {
            return list_systems(out);
        }
        RunConfig config;
        if (!config_path.empty()) {
            config = load_config(config_path);
        } else if (validate_cmd->parsed()) {
            // Reuse the configuration stored with the report.
            const json doc = read_json(report_path);
            if (doc.contains("config")) {
                config = config_from_json(doc.at("config"));
            }
        }
        auto* active = app.get_subcommands().front();
        if (active->count("--out") > 0) {
            config.out = out_dir;
        }
        if (active->count("--seed") > 0) {
            config.seed = seed;
        }
        if (active->count("--system") > 0) {
            config.system = system_name;
            make_system(config.system, config.system_options);
        }
        if (discover_cmd->parsed() && discover_cmd->count("--degree") > 0) {
            if (degree < 1) {
                throw ConfigError("--degree must be at least 1");
            }
            config.degree = degree;
        }
        if (discover_cmd->parsed()) {
            return discover(config, flags, out);
        }
        if (validate_cmd->parsed()) {
            return validate(config, report_path, out);
        }
        if (sweep_cmd->parsed()) {
            if (degrees.empty()) {
                degrees = config.degrees.empty() ? std::vector<int>{config.degree} : config.degrees;
            }
            for (std::size_t i = 0; i < degrees.size(); ++i) {
                if (degrees[i] < 1 || (i > 0 && degrees[i] <= degrees[i - 1])) {
                    throw ConfigError("--degrees must be ascending integers >= 1");
                }
            }
            return sweep(config, degrees, full, flags, out);
        }
        return simulate(config, t_end, points, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const SizeLimitError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const IoError& e) {
        err << "input error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    }
}

}  // namespace sid::cli
