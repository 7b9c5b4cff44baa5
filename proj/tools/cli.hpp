#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace splinelab::cli {

/// Parameters for one driver invocation. Empty lists and empty strings mean
/// "use the subcommand default" (see README).
struct ExperimentConfig {
  std::string command;
  std::string mesh = "uniform";     // uniform | random | geometric
  std::vector<int> k;               // order per axis (one entry is repeated)
  std::size_t dim = 0;              // 0: from k, or the subcommand default
  std::vector<std::size_t> n;       // basis count per axis, one run per entry
  double ratio = 2.0;               // geometric cell ratio
  std::string function;             // named test function or "step"
  std::string step_file;            // JSON step function, overrides function
  std::uint64_t seed = 20240611;
  std::string out;                  // output directory
  std::size_t samples = 1000;
  std::size_t meshes = 10;
  double tol = 1e-10;
  double alpha = 5.0;
  std::size_t levels = 3;
  std::vector<int> orders{2, 2};
  std::size_t points = 64;          // divergence sample grid per axis
  std::vector<double> lambdas{0.25, 0.5, 1.0, 2.0};
  std::size_t resolution = 128;
  double rho = 0.5;
  std::size_t trials = 10000;
};

const std::vector<std::string>& subcommands();

/// Flags override values from --config; unknown flags, unknown config keys
/// and out-of-range values throw Error(UsageError) naming the key.
ExperimentConfig parse_config(const std::vector<std::string>& args);

struct RunResult {
  int exit_code = 0;
  std::vector<std::string> files;
};

/// Runs the subcommand and writes its artifacts into config.out (created if
/// missing). Exit 1 writes failure.json next to them.
RunResult run(const ExperimentConfig& config, std::ostream& log);

/// parse_config + run with exit code 2 on usage errors.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace splinelab::cli
