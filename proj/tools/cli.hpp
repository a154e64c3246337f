#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace robin::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kConfigError = 2,
  kNotConverged = 3,
  kViolation = 4,
};

/// Parses `lo:hi:log|lin[:n]`. Throws std::invalid_argument on malformed or
/// empty grids. Log grids default to one point per decade, linear grids to 11.
std::vector<double> parse_beta_grid(const std::string& text);

/// Entry point of robin-bounds; returns the process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace robin::cli
