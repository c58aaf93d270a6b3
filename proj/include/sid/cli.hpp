#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sid/config.hpp"

namespace sid::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitThreshold = 4;

/// Bases larger than this need --allow-large.
inline constexpr std::size_t kLargeBasis = 10000;

struct Flags {
    bool allow_large = false;
};

int list_systems(std::ostream& out);

/// Runs the full pipeline and writes the report artifacts to config.out.
int discover(const RunConfig& config, const Flags& flags, std::ostream& out);

/// Monte Carlo validation of the stage-3 invariants stored in a report.
int validate(const RunConfig& config, const std::string& report_path, std::ostream& out);

/// Counts (K, M, c) per degree; `full` runs every stage instead.
int sweep(const RunConfig& config, const std::vector<int>& degrees, bool full,
          const Flags& flags, std::ostream& out);

/// One trajectory from a random initial state, written as CSV.
int simulate(const RunConfig& config, double t_end, std::size_t points, std::ostream& out);

/// Parses argv and dispatches; errors are mapped to the exit codes above and
/// reported on `err`.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace sid::cli
