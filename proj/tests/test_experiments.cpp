#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vrclt/errors.hpp"
#include "vrclt/experiments.hpp"

using namespace vrclt;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Fresh output directory per test; removed on destruction so reruns start
// clean even after a failed assertion.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("vrclt_test_" + tag);
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

std::string read_file(const fs::path& p) {
  std::ifstream f(p);
  REQUIRE(f.good());
  std::ostringstream out;
  out << f.rdbuf();
  return out.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::istringstream text(read_file(p));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(text, line)) {
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    rows.push_back(std::move(fields));
  }
  return rows;
}

ExperimentOptions quiet_options(const TempDir& dir, std::uint64_t seed = 777,
                                int workers = 1) {
  ExperimentOptions options;
  options.out_dir = dir.str();
  options.seed = seed;
  options.workers = workers;
  options.quiet = true;
  return options;
}

const char* kNoiseFreeRates = R"({
  "experiment": "rates",
  "algorithms": ["vr_sgd"],
  "steps": 6,
  "trajectories": 3,
  "schedule": {"type": "geometric", "rho": 0.5},
  "problem": {
    "type": "quadratic_gaussian",
    "dim": 2,
    "eta": 1.0,
    "lip": 1.0,
    "rotate": false,
    "noise_scale": 0.0,
    "x_star": [0.0, 0.0],
    "x0": [3.0, 4.0]
  }
})";

}  // namespace

TEST_CASE("invalid configs fail before any output is written") {
  TempDir dir("exp_invalid");
  const auto options = quiet_options(dir);
  const auto run = [&](const std::string& experiment, const std::string& text,
                       std::vector<std::string> overrides = {}) {
    run_experiment(experiment, text, overrides, options);
  };

  CHECK_THROWS_AS(run("rates", "{not json"), ConfigError);
  CHECK_THROWS_AS(run("rates", "3"), ConfigError);
  CHECK_THROWS_AS(run("rates", R"({"bogus_key": 1})"), ConfigError);
  CHECK_THROWS_AS(run("rates", R"({"experiment": "clt"})"), ConfigError);
  CHECK_THROWS_WITH_AS(
      run("bogus", "{}"),
      "unknown experiment 'bogus' (expected rates, clt, coverage, or compare)",
      ConfigError);
  CHECK_THROWS_AS(run("rates", R"({"trajectories": 0})"), ConfigError);
  CHECK_THROWS_AS(run("rates", R"({"steps": 0})"), ConfigError);
  CHECK_THROWS_AS(run("rates", R"({"algorithms": ["baseline_sgd"]})"),
                  ConfigError);
  CHECK_THROWS_AS(run("clt", R"({"algorithms": ["baseline_sgd"]})"),
                  ConfigError);
  CHECK_THROWS_AS(run("compare", R"({"algorithms": ["baseline_sgd"]})"),
                  ConfigError);
  CHECK_THROWS_AS(run("rates", R"({"algorithms": []})"), ConfigError);
  CHECK_THROWS_AS(run("rates", R"({"problem": {"dim": 0}})"), ConfigError);
  CHECK_THROWS_AS(run("rates", R"({"problem": {"eta": 2.0, "lip": 1.0}})"),
                  ConfigError);
  CHECK_THROWS_AS(
      run("rates", R"({"problem": {"type": "linear_regression",
                                   "noise_scale": 1.0}})"),
      ConfigError);
  CHECK_THROWS_AS(run("rates", R"({"schedule": {"type": "geometric",
                                                "v": 2.0}})"),
                  ConfigError);
  CHECK_THROWS_AS(run("coverage", R"({"delta": 1.0})"), ConfigError);
  CHECK_THROWS_AS(run("coverage", R"({"n_grid": []})"), ConfigError);

  // Override grammar failures.
  CHECK_THROWS_AS(run("rates", "{}", {"nonsense"}), ConfigError);
  CHECK_THROWS_AS(run("rates", "{}", {"=5"}), ConfigError);
  CHECK_THROWS_AS(run("rates", R"({"steps": 6})", {"steps.inner=1"}),
                  ConfigError);

  // Every failure above happened before the first write.
  CHECK(!fs::exists(dir.path));
}

TEST_CASE("noise free rates hit the optimum in one step and keep a positive bound") {
  // eta == lip makes the default vr_sgd step exact, so every trajectory sits
  // on the optimum from k = 1 onward and the mse column is exactly zero.
  TempDir dir("exp_rates");
  const auto written =
      run_experiment("rates", kNoiseFreeRates, {}, quiet_options(dir));

  REQUIRE(written.size() == 1);
  const fs::path csv_path = dir.path / "rates_vr_sgd.csv";
  CHECK(fs::exists(csv_path));

  const auto rows = read_csv(csv_path);
  REQUIRE(rows.size() == 8);  // header + k = 0..6
  CHECK(rows[0] == std::vector<std::string>{"k", "N_k", "cum_oracle",
                                            "mean_err", "mse", "theory_bound"});
  for (std::size_t i = 1; i < rows.size(); ++i) {
    REQUIRE(rows[i].size() == 6);
    const std::int64_t k = std::stoll(rows[i][0]);
    CHECK(k == static_cast<std::int64_t>(i) - 1);
    const std::int64_t batch = std::stoll(rows[i][1]);
    const std::int64_t cum = std::stoll(rows[i][2]);
    CHECK(batch == (k < 6 ? std::int64_t{1} << (k + 1) : 0));
    CHECK(cum == (std::int64_t{1} << (k + 1)) - 2);
    const double mean_err = std::stod(rows[i][3]);
    const double mse = std::stod(rows[i][4]);
    const double bound = std::stod(rows[i][5]);
    if (k == 0) {
      CHECK(mean_err == doctest::Approx(5.0).epsilon(1e-12));
      CHECK(mse == doctest::Approx(25.0).epsilon(1e-12));
    } else {
      CHECK(mean_err == 0.0);
      CHECK(mse == 0.0);
    }
    // Noise free bound is rho^k times the squared start distance.
    CHECK(bound ==
          doctest::Approx(std::pow(0.5, static_cast<double>(k)) * 25.0)
              .epsilon(1e-12));
    CHECK(bound > 0.0);
  }
}

TEST_CASE("rates covers linear regression with a capped polynomial schedule") {
  TempDir dir("exp_rates_linreg");
  const char* config = R"({
    "algorithms": ["vr_sgd"],
    "steps": 3,
    "trajectories": 2,
    "schedule": {"type": "polynomial", "v": 1.0, "cap": 2},
    "problem": {
      "type": "linear_regression",
      "dim": 2,
      "eta": 1.0,
      "lip": 4.0,
      "noise_sigma": 0.5,
      "x0": [1.0, -1.0]
    }
  })";
  const auto written = run_experiment("rates", config, {}, quiet_options(dir));
  REQUIRE(written.size() == 1);

  const auto rows = read_csv(dir.path / "rates_vr_sgd.csv");
  REQUIRE(rows.size() == 5);
  // ceil((k+1)^1) clipped at the cap, zero batch on the final record row.
  const std::vector<std::int64_t> batches{1, 2, 2, 0};
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(std::stoll(rows[i][1]) == batches[i - 1]);
    CHECK(std::stod(rows[i][5]) > 0.0);
  }
  CHECK(std::stoll(rows[4][2]) == 5);
}

TEST_CASE("clt experiment writes samples histograms and diagnostics") {
  TempDir dir("exp_clt");
  const char* config = R"({
    "experiment": "clt",
    "algorithms": ["vr_sgd", "vr_accelerated"],
    "replications": 200,
    "steps": 8,
    "stacked_output": true,
    "schedule": {"type": "geometric", "rho": 0.5},
    "problem": {
      "type": "quadratic_gaussian",
      "dim": 2,
      "eta": 1.0,
      "lip": 4.0,
      "rotate": true,
      "spectrum_seed": 3,
      "noise_scale": 1.0,
      "x0": [2.0, 2.0]
    }
  })";
  const auto written = run_experiment("clt", config, {}, quiet_options(dir));
  REQUIRE(written.size() == 6);
  for (const char* name :
       {"clt_samples_vr_sgd.csv", "clt_histograms_vr_sgd.csv",
        "clt_diagnostics_vr_sgd.json", "clt_samples_vr_accelerated.csv",
        "clt_histograms_vr_accelerated.csv",
        "clt_diagnostics_vr_accelerated.json"}) {
    CHECK(fs::exists(dir.path / name));
  }

  // vr_sgd is not stacked: the sample width is the problem dimension.
  const auto sgd_samples = read_csv(dir.path / "clt_samples_vr_sgd.csv");
  REQUIRE(sgd_samples.size() == 201);
  CHECK(sgd_samples[0] == std::vector<std::string>{"rep", "e_0", "e_1"});

  // vr_accelerated stacks two states and stacked_output keeps all of them.
  const auto acc_samples =
      read_csv(dir.path / "clt_samples_vr_accelerated.csv");
  REQUIRE(acc_samples.size() == 201);
  CHECK(acc_samples[0] ==
        std::vector<std::string>{"rep", "e_0", "e_1", "e_2", "e_3"});

  const auto hist = read_csv(dir.path / "clt_histograms_vr_sgd.csv");
  REQUIRE(hist.size() > 1);
  CHECK(hist[0] == std::vector<std::string>{"coord", "bin_lo", "bin_hi",
                                            "count"});

  const json sgd = json::parse(read_file(dir.path / "clt_diagnostics_vr_sgd.json"));
  CHECK(sgd.at("algorithm") == "vr_sgd");
  CHECK(sgd.at("replications") == 200);
  CHECK(sgd.at("stacked") == false);
  CHECK(sgd.at("marginal_of_stacked") == false);
  CHECK(sgd.at("sigma_construction") == "lyapunov");
  CHECK(sgd.at("sigma_theory").size() == 2);
  CHECK(sgd.at("empirical_cov").size() == 2);
  CHECK(sgd.at("ks_statistic").size() == 2);
  CHECK(sgd.at("cov_rel_frobenius").get<double>() >= 0.0);
  // Contraction sqrt(q) lifted by the geometric rescaling 1/sqrt(rho), with
  // q = 1 - 4 eta lip / (eta + lip)^2 = 0.36 here.
  CHECK(sgd.at("companion_radius_bound").get<double>() ==
        doctest::Approx(std::sqrt(0.36 / 0.5)).epsilon(1e-12));
  CHECK(sgd.contains("grad_cov_theory"));
  CHECK(sgd.contains("gap_mean_theory"));
  CHECK(sgd.at("gap_mean_se").get<double>() > 0.0);

  const json acc =
      json::parse(read_file(dir.path / "clt_diagnostics_vr_accelerated.json"));
  CHECK(acc.at("stacked") == true);
  CHECK(acc.at("marginal_of_stacked") == false);
  CHECK(acc.at("sigma_theory").size() == 4);
  CHECK(acc.at("ks_statistic").size() == 4);
  // Momentum contraction 1 - gamma = 0.5 lifted by 1/sqrt(rho).
  CHECK(acc.at("companion_radius_bound").get<double>() ==
        doctest::Approx(0.5 / std::sqrt(0.5)).epsilon(1e-12));
  CHECK(!acc.contains("grad_cov_theory"));
}

TEST_CASE("compare tracks the baseline at unit batch size") {
  TempDir dir("exp_compare");
  const char* config = R"({
    "algorithms": ["vr_sgd"],
    "steps": 5,
    "trajectories": 4,
    "schedule": {"type": "geometric", "rho": 0.5},
    "problem": {
      "type": "quadratic_gaussian",
      "dim": 1,
      "eta": 1.0,
      "lip": 4.0,
      "rotate": false,
      "noise_scale": 0.5,
      "x0": [2.0]
    }
  })";
  const auto written =
      run_experiment("compare", config, {}, quiet_options(dir));
  REQUIRE(written.size() == 1);

  const auto rows = read_csv(dir.path / "compare.csv");
  CHECK(rows[0] == std::vector<std::string>{"algorithm", "k", "batch",
                                            "cum_oracle", "mean_err", "mse"});
  // vr_sgd rows k = 0..5 plus baseline checkpoints {0,1,2,4,8,16,32,62}.
  REQUIRE(rows.size() == 1 + 6 + 8);

  std::size_t baseline_rows = 0;
  std::int64_t last_baseline_k = -1;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    REQUIRE(rows[i].size() == 6);
    const std::int64_t k = std::stoll(rows[i][1]);
    const std::int64_t batch = std::stoll(rows[i][2]);
    const std::int64_t cum = std::stoll(rows[i][3]);
    if (rows[i][0] == "baseline_sgd") {
      ++baseline_rows;
      // Baseline draws one sample per step, so the budget axis is k itself.
      if (k > 0) CHECK(batch == 1);
      CHECK(cum == k);
      CHECK(k > last_baseline_k);
      last_baseline_k = k;
    } else {
      CHECK(rows[i][0] == "vr_sgd");
      CHECK(batch == (k < 5 ? std::int64_t{1} << (k + 1) : 0));
    }
  }
  CHECK(baseline_rows == 8);
  // The baseline runs out to the batched methods' total oracle budget.
  CHECK(last_baseline_k == 62);
}

TEST_CASE("coverage grid is sorted and identical across reruns and workers") {
  const char* config = R"({
    "experiment": "coverage",
    "algorithms": ["vr_sgd"],
    "n_grid": [6, 5],
    "budget_grid": [40, 20],
    "delta": 0.1,
    "meta_reps": 30,
    "schedule": {"type": "geometric", "rho": 0.5},
    "problem": {
      "type": "quadratic_gaussian",
      "dim": 1,
      "eta": 1.0,
      "lip": 4.0,
      "rotate": false,
      "noise_scale": 1.0,
      "x0": [2.0]
    }
  })";

  TempDir dir_a("exp_cov_a");
  const auto written =
      run_experiment("coverage", config, {}, quiet_options(dir_a));
  REQUIRE(written.size() == 2);

  const auto rows = read_csv(dir_a.path / "coverage.csv");
  REQUIRE(rows.size() == 5);  // header + 2 budgets x 2 n
  CHECK(rows[0][0] == "algorithm");

  // Rows come back sorted by (budget, n) regardless of the config order.
  const std::vector<std::pair<std::string, std::string>> expected{
      {"5", "20"}, {"6", "20"}, {"5", "40"}, {"6", "40"}};
  for (std::size_t i = 1; i < rows.size(); ++i) {
    REQUIRE(rows[i].size() == 10);
    CHECK(rows[i][0] == "vr_sgd");
    CHECK(rows[i][1] == expected[i - 1].first);
    CHECK(rows[i][2] == expected[i - 1].second);
    // Steps run until the cumulative cost reaches the budget: 2+4+8+16 = 30
    // first covers 20 at step 4, and 62 first covers 40 at step 5.
    const bool small = rows[i][2] == "20";
    CHECK(std::stoll(rows[i][5]) == (small ? 4 : 5));
    CHECK(std::stoll(rows[i][6]) == (small ? 30 : 62));
    const double coverage = std::stod(rows[i][7]);
    CHECK(coverage >= 0.0);
    CHECK(coverage <= 1.0);
    CHECK(std::stod(rows[i][8]) >= 0.0);
    CHECK(std::stod(rows[i][9]) > 0.0);
  }

  const json report = json::parse(read_file(dir_a.path / "coverage.json"));
  REQUIRE(report.is_array());
  REQUIRE(report.size() == 4);
  CHECK(report[0].at("delta").get<double>() == doctest::Approx(0.1));
  CHECK(report[0].at("meta_reps") == 30);

  // Same seed, fresh run: byte identical output.
  TempDir dir_b("exp_cov_b");
  run_experiment("coverage", config, {}, quiet_options(dir_b));
  CHECK(read_file(dir_b.path / "coverage.csv") ==
        read_file(dir_a.path / "coverage.csv"));
  CHECK(read_file(dir_b.path / "coverage.json") ==
        read_file(dir_a.path / "coverage.json"));

  // Worker count changes scheduling only, never results.
  TempDir dir_c("exp_cov_c");
  run_experiment("coverage", config, {}, quiet_options(dir_c, 777, 2));
  CHECK(read_file(dir_c.path / "coverage.csv") ==
        read_file(dir_a.path / "coverage.csv"));
}

TEST_CASE("set overrides reach nested keys") {
  TempDir dir("exp_override");
  run_experiment("rates", kNoiseFreeRates,
                 {"steps=2", "schedule.rho=0.25"}, quiet_options(dir));
  const auto rows = read_csv(dir.path / "rates_vr_sgd.csv");
  REQUIRE(rows.size() == 4);  // header + k = 0..2
  // rho 0.25 from the override, not the 0.5 in the config text.
  CHECK(std::stoll(rows[1][1]) == 4);
  CHECK(std::stoll(rows[2][1]) == 16);
  CHECK(std::stoll(rows[3][1]) == 0);
  CHECK(std::stod(rows[2][4]) == 0.0);
}
