#pragma once

// Reproducible experiments behind the llt_lab command line.

#include <cstdint>
#include <string>
#include <vector>

namespace llt::lab {

struct ExperimentConfig {
  std::string experiment = "density";
  std::string source = "uniform:h=1";
  std::string noise = "bernoulli";
  std::vector<long> n = {16};
  double grid_min = -5.0;
  double grid_max = 5.0;
  long grid_points = 1001;
  std::string norm = "sup";
  double tol = 1e-12;
  long window = 20;    // lattice window K
  long samples = 0;    // Monte Carlo cross-check draws (0 = off)
  std::uint64_t seed = 42;
  std::string output;  // JSON path; empty writes JSON to stdout

  bool operator==(const ExperimentConfig&) const = default;
};

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"check-condition", "poisson", "autocorr",  "density",
                                                 "converge",        "oscillate", "limits", "regularity"};
  return names;
}

/// key = value lines, one field per line, in declaration order.
std::string serialize(const ExperimentConfig& config);

/// Inverse of serialize; unknown keys and malformed values throw InvalidParameter.
/// Blank lines and lines starting with '#' are ignored.
ExperimentConfig parse_config(const std::string& text);

/// Throws InvalidParameter for an unknown experiment, bad grid or schedule.
void validate(const ExperimentConfig& config);

struct RunResult {
  int exit_code = 0;         // 0 ok, 1 invalid input, 2 hypotheses not satisfied
  std::string json;          // result document (empty on failure)
  std::string message;       // error text on failure
  std::vector<std::string> csv_paths;
};

/// Runs the experiment. Writes JSON to config.output (when set) and grid
/// curves to CSV files next to it.
RunResult run(const ExperimentConfig& config);

}  // namespace llt::lab
