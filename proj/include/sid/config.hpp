#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sid/detector.hpp"
#include "sid/report.hpp"
#include "sid/systems.hpp"

namespace sid {

struct ValidationConfig {
    std::size_t n_cases = 100;
    double horizon = 0.0;  // 0: the system default
    std::size_t points = 200;
    /// Default CV threshold; `thresholds` overrides it per catalog label.
    double cv_threshold = 1e-6;
    std::map<std::string, double> thresholds;
    /// Model integrated for validation; empty: the report system's default.
    std::string system;
    /// When positive, each invariant is also validated after snapping to
    /// rationals with this largest denominator.
    long snapped_max_den = 0;
};

struct RunConfig {
    std::string system = "lv3";
    int degree = 3;
    std::size_t samples = 0;  // 0: the system default
    std::uint64_t seed = 0;
    ThresholdOptions threshold;
    SparsifyOptions sparsify;
    IndependenceOptions independence;
    SnapOptions snap;
    /// Held-out states used to check snapped invariants.
    std::size_t check_samples = 200;
    std::string out = "sid_out";
    ValidationConfig validation;
    SystemOptions system_options;
    std::vector<int> degrees;  // sweep only
};

/// Strict parse: unknown keys, wrong types and out-of-range values throw
/// ConfigError naming the offending key.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& c);

/// Reads a JSON file; a missing file or bad syntax is a ConfigError.
RunConfig load_config(const std::string& path);

DiscoverOptions discover_options(const RunConfig& c);

}  // namespace sid
