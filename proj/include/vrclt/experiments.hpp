#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace vrclt {

struct ExperimentOptions {
  std::string out_dir = ".";
  std::uint64_t seed = 12345;
  int workers = 0;  // 0 = hardware count
  bool quiet = false;
};

// Parses config_text (JSON; empty means all defaults), applies dotted
// key=value overrides, validates strictly (unknown keys rejected), runs the
// named experiment (rates | clt | coverage | compare), writes CSV/JSON
// outputs under options.out_dir, and prints a summary table to stdout unless
// quiet. Returns the paths written. Throws ConfigError and friends on bad
// input and the numeric error types on computation failures.
std::vector<std::string> run_experiment(
    const std::string& experiment, const std::string& config_text,
    const std::vector<std::string>& overrides,
    const ExperimentOptions& options);

}  // namespace vrclt
