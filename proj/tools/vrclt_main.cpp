#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vrclt/errors.hpp"
#include "vrclt/experiments.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw vrclt::ConfigError("cannot read config file " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batched stochastic gradient methods: convergence rates, "
               "limit-distribution diagnostics, and confidence-region "
               "coverage experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> overrides;
  vrclt::ExperimentOptions options;

  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--set", overrides,
                 "Override a config key, e.g. --set schedule.rho=0.9")
      ->take_all();
  app.add_option("--out-dir", options.out_dir, "Output directory")
      ->capture_default_str();
  app.add_option("--seed", options.seed, "Base RNG seed")
      ->envname("VRCLT_SEED")
      ->capture_default_str();
  app.add_option("--workers", options.workers,
                 "Worker threads (0 = hardware count)")
      ->capture_default_str();
  app.add_flag("--quiet", options.quiet, "Suppress the summary table");

  app.add_subcommand("rates", "Error curves against the theoretical bounds");
  app.add_subcommand("clt", "Rescaled-error samples and normality checks");
  app.add_subcommand("coverage", "Confidence-region coverage grid");
  app.add_subcommand("compare",
                     "Error versus oracle calls, including the unbatched "
                     "baseline");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const std::string config_text =
        config_path.empty() ? std::string() : slurp(config_path);
    const std::string experiment = app.get_subcommands().front()->get_name();
    vrclt::run_experiment(experiment, config_text, overrides, options);
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
