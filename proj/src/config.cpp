#include "sid/config.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>

#include "sid/chemistry.hpp"
#include "sid/errors.hpp"

namespace sid {

namespace {

using nlohmann::json;

// Reads one JSON object, remembering which keys were consumed so that the
// leftovers can be reported as unknown.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) {
            throw ConfigError(where() + " must be an object");
        }
    }

    bool has(const std::string& key) {
        known_.insert(key);
        return j_.contains(key);
    }

    const json& raw(const std::string& key) { return j_.at(key); }

    std::string name(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    void string(const std::string& key, std::string& out) {
        if (!has(key)) {
            return;
        }
        if (!raw(key).is_string()) {
            throw ConfigError(name(key) + " must be a string");
        }
        out = raw(key).get<std::string>();
    }

    void boolean(const std::string& key, bool& out) {
        if (!has(key)) {
            return;
        }
        if (!raw(key).is_boolean()) {
            throw ConfigError(name(key) + " must be true or false");
        }
        out = raw(key).get<bool>();
    }

    void positive(const std::string& key, double& out) {
        if (!has(key)) {
            return;
        }
        const double v = number(key);
        if (!(v > 0.0)) {
            throw ConfigError(name(key) + " must be positive");
        }
        out = v;
    }

    void nonnegative(const std::string& key, double& out) {
        if (!has(key)) {
            return;
        }
        const double v = number(key);
        if (!(v >= 0.0)) {
            throw ConfigError(name(key) + " must not be negative");
        }
        out = v;
    }

    template <typename T>
    void count(const std::string& key, T& out, T min_value) {
        if (!has(key)) {
            return;
        }
        const json& v = raw(key);
        if (!v.is_number_integer()) {
            throw ConfigError(name(key) + " must be an integer");
        }
        const auto value = v.get<long long>();
        if (value < static_cast<long long>(min_value)) {
            throw ConfigError(name(key) + " must be at least " + std::to_string(min_value));
        }
        out = static_cast<T>(value);
    }

    void seed(const std::string& key, std::uint64_t& out) {
        if (!has(key)) {
            return;
        }
        const json& v = raw(key);
        if (!v.is_number_integer()) {
            throw ConfigError(name(key) + " must be an integer");
        }
        if (!v.is_number_unsigned() && v.get<long long>() < 0) {
            throw ConfigError(name(key) + " must not be negative");
        }
        out = v.get<std::uint64_t>();
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!known_.count(key)) {
                throw ConfigError("unknown key '" + name(key) + "'");
            }
        }
    }

private:
    double number(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number()) {
            throw ConfigError(name(key) + " must be a number");
        }
        return v.get<double>();
    }

    std::string where() const { return path_.empty() ? "config" : path_; }

    const json& j_;
    std::string path_;
    std::set<std::string> known_;
};

void read_threshold(Section& s, ThresholdOptions& t) {
    Section sub(s.raw("threshold"), "threshold");
    std::string mode = to_string(t.mode);
    sub.string("mode", mode);
    try {
        t.mode = threshold_mode_from_string(mode);
    } catch (const Error&) {
        throw ConfigError("threshold.mode must be absolute, relative or log-gap");
    }
    sub.positive("eps", t.eps);
    sub.positive("min_gap_decades", t.min_gap_decades);
    sub.finish();
}

void read_sparsify(Section& s, SparsifyOptions& o) {
    Section sub(s.raw("sparsify"), "sparsify");
    sub.count("max_sweeps", o.max_sweeps, std::size_t{1});
    sub.count("restarts", o.restarts, std::size_t{0});
    sub.positive("tol", o.tol);
    sub.count("grid", o.grid, std::size_t{1});
    sub.finish();
}

void read_independence(Section& s, IndependenceOptions& o) {
    Section sub(s.raw("independence"), "independence");
    sub.positive("eps", o.eps);
    sub.count("max_points", o.max_points, std::size_t{1});
    sub.finish();
}

void read_snap(Section& s, SnapOptions& o) {
    Section sub(s.raw("snap"), "snap");
    sub.count("max_den", o.max_den, 1L);
    sub.positive("entry_tol", o.entry_tol);
    sub.positive("conservation_tol", o.conservation_tol);
    sub.positive("residual_floor", o.residual_floor);
    sub.positive("zero_tol", o.zero_tol);
    sub.finish();
}

void read_validation(Section& s, ValidationConfig& v) {
    Section sub(s.raw("validation"), "validation");
    sub.count("n_cases", v.n_cases, std::size_t{1});
    sub.nonnegative("horizon", v.horizon);
    sub.count("points", v.points, std::size_t{2});
    sub.positive("cv_threshold", v.cv_threshold);
    if (sub.has("thresholds")) {
        Section t(sub.raw("thresholds"), "validation.thresholds");
        for (const auto& [label, value] : sub.raw("thresholds").items()) {
            double x = 0.0;
            t.positive(label, x);
            v.thresholds[label] = x;
        }
        t.finish();
    }
    sub.string("system", v.system);
    sub.count("snapped_max_den", v.snapped_max_den, 0L);
    sub.finish();
}

void read_chemistry(Section& s, ChemistryOptions& c) {
    Section sub(s.raw("chemistry"), "chemistry");
    if (sub.has("rates")) {
        const json& r = sub.raw("rates");
        if (!r.is_array() || r.size() != c.rates.size()) {
            throw ConfigError("chemistry.rates must be an array of " +
                              std::to_string(c.rates.size()) + " numbers");
        }
        for (std::size_t i = 0; i < c.rates.size(); ++i) {
            if (!r[i].is_number() || !(r[i].get<double>() > 0.0)) {
                throw ConfigError("chemistry.rates entries must be positive numbers");
            }
            c.rates[i] = r[i].get<double>();
        }
    }
    if (sub.has("upper")) {
        Section u(sub.raw("upper"), "chemistry.upper");
        const auto known = chem::species_names(chem::kSpecies12);
        for (const auto& [species, value] : sub.raw("upper").items()) {
            if (std::find(known.begin(), known.end(), species) == known.end()) {
                throw ConfigError("chemistry.upper: unknown species '" + species + "'");
            }
            double x = 0.0;
            u.nonnegative(species, x);
            c.upper[species] = x;
        }
        u.finish();
    }
    sub.nonnegative("default_upper", c.default_upper);
    sub.nonnegative("o3_upper", c.o3_upper);
    sub.positive("horizon", c.horizon);
    sub.count("trajectory_points", c.trajectory_points, std::size_t{2});
    sub.finish();
}

}  // namespace

RunConfig config_from_json(const nlohmann::json& j) {
    RunConfig c;
    Section s(j, "");
    s.string("system", c.system);
    s.count("degree", c.degree, 1);
    s.count("samples", c.samples, std::size_t{0});
    s.seed("seed", c.seed);
    if (s.has("threshold")) {
        read_threshold(s, c.threshold);
    }
    if (s.has("sparsify")) {
        read_sparsify(s, c.sparsify);
    }
    if (s.has("independence")) {
        read_independence(s, c.independence);
    }
    if (s.has("snap")) {
        read_snap(s, c.snap);
    }
    s.count("check_samples", c.check_samples, std::size_t{1});
    s.string("out", c.out);
    if (s.has("validation")) {
        read_validation(s, c.validation);
    }
    if (s.has("chemistry")) {
        read_chemistry(s, c.system_options.chemistry);
    }
    if (s.has("degrees")) {
        const json& d = s.raw("degrees");
        if (!d.is_array() || d.empty()) {
            throw ConfigError("degrees must be a non-empty array of integers");
        }
        for (const auto& v : d) {
            if (!v.is_number_integer() || v.get<int>() < 1) {
                throw ConfigError("degrees entries must be integers >= 1");
            }
            if (!c.degrees.empty() && v.get<int>() <= c.degrees.back()) {
                throw ConfigError("degrees must be strictly ascending");
            }
            c.degrees.push_back(v.get<int>());
        }
    }
    s.finish();
    if (c.out.empty()) {
        throw ConfigError("out must not be empty");
    }
    // Unknown system names surface here rather than mid-run.
    make_system(c.system, c.system_options);
    if (!c.validation.system.empty()) {
        make_system(c.validation.system, c.system_options);
    }
    return c;
}

nlohmann::json to_json(const RunConfig& c) {
    const auto& ch = c.system_options.chemistry;
    json j{
        {"system", c.system},
        {"degree", c.degree},
        {"samples", c.samples},
        {"seed", c.seed},
        {"threshold",
         {{"mode", to_string(c.threshold.mode)},
          {"eps", c.threshold.eps},
          {"min_gap_decades", c.threshold.min_gap_decades}}},
        {"sparsify",
         {{"max_sweeps", c.sparsify.max_sweeps},
          {"restarts", c.sparsify.restarts},
          {"tol", c.sparsify.tol},
          {"grid", c.sparsify.grid}}},
        {"independence",
         {{"eps", c.independence.eps}, {"max_points", c.independence.max_points}}},
        {"snap",
         {{"max_den", c.snap.max_den},
          {"entry_tol", c.snap.entry_tol},
          {"conservation_tol", c.snap.conservation_tol},
          {"residual_floor", c.snap.residual_floor},
          {"zero_tol", c.snap.zero_tol}}},
        {"check_samples", c.check_samples},
        {"out", c.out},
        {"validation",
         {{"n_cases", c.validation.n_cases},
          {"horizon", c.validation.horizon},
          {"points", c.validation.points},
          {"cv_threshold", c.validation.cv_threshold},
          {"thresholds", c.validation.thresholds},
          {"system", c.validation.system},
          {"snapped_max_den", c.validation.snapped_max_den}}},
        {"chemistry",
         {{"rates", ch.rates},
          {"upper", ch.upper},
          {"default_upper", ch.default_upper},
          {"o3_upper", ch.o3_upper},
          {"horizon", ch.horizon},
          {"trajectory_points", ch.trajectory_points}}},
    };
    if (!c.degrees.empty()) {
        j["degrees"] = c.degrees;
    }
    return j;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path);
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return config_from_json(j);
}

DiscoverOptions discover_options(const RunConfig& c) {
    DiscoverOptions o;
    o.samples = c.samples;
    o.seed = c.seed;
    o.threshold = c.threshold;
    o.sparsify = c.sparsify;
    o.sparsify.seed = c.seed;
    o.independence = c.independence;
    return o;
}

}  // namespace sid
