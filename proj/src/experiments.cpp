#include "vrclt/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "vrclt/errors.hpp"
#include "vrclt/inference.hpp"
#include "vrclt/parallel.hpp"
#include "vrclt/problems.hpp"
#include "vrclt/schedules.hpp"
#include "vrclt/solvers.hpp"
#include "vrclt/stats.hpp"
#include "vrclt/theory.hpp"

namespace vrclt {

namespace {

using nlohmann::json;

// Replications of one unit (algorithm, coverage cell, ...) get a disjoint
// stream-id block; coverage meta-reps subdivide theirs.
constexpr std::uint64_t kUnitStride = std::uint64_t{1} << 40;
constexpr std::uint64_t kMetaStride = std::uint64_t{1} << 16;

std::string fmt(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt4(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

// ---- config plumbing -------------------------------------------------------

[[noreturn]] void config_fail(const std::string& where,
                              const std::string& what) {
  throw ConfigError("config key '" + where + "': " + what);
}

void check_allowed_keys(const json& obj, const std::string& where,
                        const std::set<std::string>& allowed) {
  if (!obj.is_object()) config_fail(where, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (allowed.find(it.key()) == allowed.end()) {
      config_fail(where.empty() ? it.key() : where + "." + it.key(),
                  "unknown key");
    }
  }
}

double get_number(const json& obj, const std::string& where,
                  const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) config_fail(where + key, "expected a number");
  return v.get<double>();
}

std::int64_t get_integer(const json& obj, const std::string& where,
                         const std::string& key, std::int64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) config_fail(where + key, "expected an integer");
  return v.get<std::int64_t>();
}

bool get_bool(const json& obj, const std::string& where,
              const std::string& key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) config_fail(where + key, "expected a boolean");
  return v.get<bool>();
}

std::string get_string(const json& obj, const std::string& where,
                       const std::string& key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) config_fail(where + key, "expected a string");
  return v.get<std::string>();
}

// "default" or a number.
std::optional<double> get_defaultable(const json& obj, const std::string& where,
                                      const std::string& key) {
  if (!obj.contains(key)) return std::nullopt;
  const json& v = obj.at(key);
  if (v.is_string() && v.get<std::string>() == "default") return std::nullopt;
  if (v.is_number()) return v.get<double>();
  config_fail(where + key, "expected \"default\" or a number");
}

// "zero" or an explicit array of dim numbers.
Vector get_point(const json& obj, const std::string& where,
                 const std::string& key, int dim) {
  Vector out(static_cast<std::size_t>(dim), 0.0);
  if (!obj.contains(key)) return out;
  const json& v = obj.at(key);
  if (v.is_string() && v.get<std::string>() == "zero") return out;
  if (v.is_array()) {
    if (static_cast<int>(v.size()) != dim) {
      config_fail(where + key, "expected " + std::to_string(dim) + " entries");
    }
    for (int i = 0; i < dim; ++i) {
      if (!v[static_cast<std::size_t>(i)].is_number()) {
        config_fail(where + key, "expected numeric entries");
      }
      out[static_cast<std::size_t>(i)] =
          v[static_cast<std::size_t>(i)].get<double>();
    }
    return out;
  }
  config_fail(where + key, "expected \"zero\" or an array");
}

json parse_config_text(const std::string& text) {
  if (text.empty()) return json::object();
  try {
    json cfg = json::parse(text);
    if (!cfg.is_object()) throw ConfigError("config root must be an object");
    return cfg;
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

void apply_override(json& cfg, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("--set expects key.path=value, got '" + assignment +
                      "'");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;  // unquoted strings pass through verbatim
  }
  json* node = &cfg;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string part = path.substr(
        start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("--set path has an empty segment");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (!node->is_object() && !node->is_null()) {
      throw ConfigError("--set path '" + path +
                        "' descends into a non-object");
    }
    start = dot + 1;
  }
}

// ---- problem construction --------------------------------------------------

struct BuiltProblem {
  std::unique_ptr<StochasticProblem> problem;
  Vector x0;
  Matrix s0_at_opt;   // gradient noise covariance at the optimum
  double nu_sq = 0.0;  // trace of the noise covariance at x0
  double e0_sq = 0.0;  // squared start distance
  std::string type;
};

BuiltProblem build_problem(const json& cfg) {
  const json problem_cfg =
      cfg.contains("problem") ? cfg.at("problem") : json::object();
  check_allowed_keys(problem_cfg, "problem",
                     {"type", "dim", "eta", "lip", "rotate", "spectrum_seed",
                      "noise_scale", "noise_sigma", "x_star", "x0"});
  const std::string where = "problem.";
  const std::string type =
      get_string(problem_cfg, where, "type", "quadratic_gaussian");
  const int dim =
      static_cast<int>(get_integer(problem_cfg, where, "dim", 5));
  if (dim < 1) config_fail("problem.dim", "must be at least 1");
  const double eta = get_number(problem_cfg, where, "eta", 1.0);
  const double lip = get_number(problem_cfg, where, "lip", 10.0);
  if (!(eta > 0.0) || !(lip >= eta)) {
    config_fail("problem.eta/lip", "need 0 < eta <= lip");
  }
  const bool rotate = get_bool(problem_cfg, where, "rotate", true);
  const std::uint64_t spectrum_seed = static_cast<std::uint64_t>(
      get_integer(problem_cfg, where, "spectrum_seed", 7));
  const Vector x_star = get_point(problem_cfg, where, "x_star", dim);

  BuiltProblem out;
  out.type = type;
  out.x0 = get_point(problem_cfg, where, "x0", dim);

  if (type == "quadratic_gaussian") {
    if (problem_cfg.contains("noise_sigma")) {
      config_fail("problem.noise_sigma", "only applies to linear_regression");
    }
    const double noise_scale =
        get_number(problem_cfg, where, "noise_scale", 1.0);
    if (!(noise_scale >= 0.0)) {
      config_fail("problem.noise_scale", "must be >= 0");
    }
    const Vector spectrum = linspace_spectrum(eta, lip, dim);
    const Matrix hess = rotate ? spd_from_spectrum(spectrum, spectrum_seed)
                               : Matrix::diag(spectrum);
    const Matrix s0 = Matrix::identity(dim).scaled(noise_scale);
    out.problem =
        std::make_unique<QuadraticGaussianProblem>(hess, x_star, s0);
  } else if (type == "linear_regression") {
    if (problem_cfg.contains("noise_scale")) {
      config_fail("problem.noise_scale", "only applies to quadratic_gaussian");
    }
    const double noise_sigma =
        get_number(problem_cfg, where, "noise_sigma", 1.0);
    // eta/lip describe the objective; the feature covariance contributes a
    // factor 2 through the squared loss.
    const Vector spectrum = linspace_spectrum(0.5 * eta, 0.5 * lip, dim);
    const Matrix feature_cov = rotate
                                   ? spd_from_spectrum(spectrum, spectrum_seed)
                                   : Matrix::diag(spectrum);
    out.problem = std::make_unique<LinearRegressionProblem>(
        feature_cov, x_star, noise_sigma);
  } else {
    config_fail("problem.type",
                "expected quadratic_gaussian or linear_regression");
  }

  out.s0_at_opt = out.problem->noise_covariance_at(out.problem->x_star());
  out.nu_sq = out.problem->noise_covariance_at(out.x0).trace();
  out.e0_sq = [&] {
    const Vector d = vec_sub(out.x0, out.problem->x_star());
    return vec_dot(d, d);
  }();
  return out;
}

// ---- algorithm resolution --------------------------------------------------

struct ResolvedAlg {
  AlgorithmKind kind = AlgorithmKind::VrSgd;
  SolverConfig solver;
  Hyperparameters hyper;        // empty for baseline
  std::optional<BatchSchedule> schedule;  // VR methods only
};

std::vector<std::string> algorithm_names(const json& cfg,
                                         std::vector<std::string> fallback) {
  if (!cfg.contains("algorithms")) return fallback;
  const json& v = cfg.at("algorithms");
  if (!v.is_array() || v.empty()) {
    config_fail("algorithms", "expected a nonempty array of names");
  }
  std::vector<std::string> out;
  for (const json& e : v) {
    if (!e.is_string()) config_fail("algorithms", "expected strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

ResolvedAlg resolve_algorithm(const std::string& name, const json& cfg,
                              const StochasticProblem& problem) {
  ResolvedAlg alg;
  alg.kind = algorithm_kind_from_string(name);
  alg.solver.kind = alg.kind;

  if (alg.kind == AlgorithmKind::BaselineSgd) {
    const auto c = get_defaultable(cfg, "", "baseline_c");
    alg.solver.baseline_c = c ? *c : 1.0 / problem.eta();
    alg.solver.baseline_matrix_step =
        get_bool(cfg, "", "baseline_matrix_step", false);
    return alg;
  }

  const auto alpha = get_defaultable(cfg, "", "alpha");
  alg.solver.alpha = alpha ? *alpha : 0.0;
  alg.hyper = alpha ? derive_hyperparameters(alg.kind, problem.eta(),
                                             problem.lip(), *alpha)
                    : default_hyperparameters(alg.kind, problem.eta(),
                                              problem.lip());
  alg.solver.alpha = alg.hyper.alpha;
  const auto beta = get_defaultable(cfg, "", "beta");
  if (beta) alg.solver.beta = *beta;

  const json schedule_cfg =
      cfg.contains("schedule") ? cfg.at("schedule") : json::object();
  check_allowed_keys(schedule_cfg, "schedule", {"type", "rho", "v", "cap"});
  const std::string stype =
      get_string(schedule_cfg, "schedule.", "type", "geometric");
  std::optional<std::int64_t> cap;
  if (schedule_cfg.contains("cap")) {
    cap = get_integer(schedule_cfg, "schedule.", "cap", 0);
  }
  if (stype == "geometric") {
    if (schedule_cfg.contains("v")) {
      config_fail("schedule.v", "only applies to polynomial schedules");
    }
    const auto rho = get_defaultable(schedule_cfg, "schedule.", "rho");
    alg.schedule = geometric_schedule(
        rho ? *rho : default_rho(alg.kind, problem.eta(), problem.lip()), cap);
  } else if (stype == "polynomial") {
    if (schedule_cfg.contains("rho")) {
      config_fail("schedule.rho", "only applies to geometric schedules");
    }
    alg.schedule =
        polynomial_schedule(get_number(schedule_cfg, "schedule.", "v", 2.0),
                            cap);
  } else {
    config_fail("schedule.type", "expected geometric or polynomial");
  }
  return alg;
}

// ---- output helpers --------------------------------------------------------

struct OutputSink {
  std::filesystem::path dir;
  std::vector<std::string> written;

  std::string write(const std::string& name, const std::string& content) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path path = dir / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write output file " + path.string());
    f << content;
    f.close();
    written.push_back(path.string());
    return path.string();
  }
};

void print_table(const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t j = 0; j < header.size(); ++j) width[j] = header[j].size();
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      width[j] = std::max(width[j], row[j].size());
    }
  }
  auto print_row = [&](const std::vector<std::string>& row) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      std::cout << (j == 0 ? "" : "  ");
      std::cout << row[j];
      for (std::size_t pad = row[j].size(); pad < width[j]; ++pad) {
        std::cout << ' ';
      }
    }
    std::cout << '\n';
  };
  print_row(header);
  for (const auto& row : rows) print_row(row);
}

json matrix_to_json(const Matrix& m) {
  json out = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(row);
  }
  return out;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (double x : v) out.push_back(x);
  return out;
}

// ---- per-experiment runners ------------------------------------------------

struct CommonKeys {
  std::set<std::string> keys;
};

void check_top_level(const json& cfg, const std::string& experiment,
                     std::set<std::string> extra) {
  extra.insert("experiment");
  extra.insert("problem");
  check_allowed_keys(cfg, "", extra);
  if (cfg.contains("experiment")) {
    const std::string declared = cfg.at("experiment").get<std::string>();
    if (declared != experiment) {
      config_fail("experiment", "config declares '" + declared +
                                    "' but the subcommand is '" + experiment +
                                    "'");
    }
  }
}

// Mean error and MSE at every recorded step, reduced over trajectories in
// index order so output is independent of worker scheduling.
struct ErrorCurves {
  std::vector<double> mean_err;
  std::vector<double> mse;
};

ErrorCurves error_curves(const StochasticProblem& problem,
                         const ResolvedAlg& alg, const Vector& x0,
                         std::int64_t steps, int trajectories,
                         std::uint64_t seed, std::uint64_t stream_base,
                         int workers,
                         const std::vector<std::int64_t>* record_at) {
  const std::size_t n_points =
      record_at ? record_at->size() : static_cast<std::size_t>(steps + 1);
  std::vector<std::vector<double>> norms(
      static_cast<std::size_t>(trajectories));
  const Vector& x_star = problem.x_star();

  parallel_for(trajectories, workers, [&](std::int64_t t) {
    RngStream rng(seed, stream_base + static_cast<std::uint64_t>(t));
    const Trajectory traj = run_solver(
        problem, alg.solver,
        alg.schedule ? &*alg.schedule : nullptr, x0, steps, rng,
        record_at == nullptr, record_at);
    std::vector<double>& slot = norms[static_cast<std::size_t>(t)];
    slot.resize(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
      slot[i] = vec_norm(vec_sub(traj.states[i], x_star));
    }
  });

  ErrorCurves curves;
  curves.mean_err.assign(n_points, 0.0);
  curves.mse.assign(n_points, 0.0);
  for (int t = 0; t < trajectories; ++t) {
    for (std::size_t i = 0; i < n_points; ++i) {
      const double e = norms[static_cast<std::size_t>(t)][i];
      curves.mean_err[i] += e;
      curves.mse[i] += e * e;
    }
  }
  const double inv = 1.0 / static_cast<double>(trajectories);
  for (std::size_t i = 0; i < n_points; ++i) {
    curves.mean_err[i] *= inv;
    curves.mse[i] *= inv;
  }
  return curves;
}

void run_rates(const json& cfg, const BuiltProblem& built,
               const ExperimentOptions& options, OutputSink* sink) {
  check_top_level(cfg, "rates",
                  {"algorithms", "alpha", "beta", "schedule", "trajectories",
                   "steps"});
  const int trajectories =
      static_cast<int>(get_integer(cfg, "", "trajectories", 100));
  if (trajectories < 1) config_fail("trajectories", "must be at least 1");
  const std::int64_t steps = get_integer(cfg, "", "steps", 30);
  if (steps < 1) config_fail("steps", "must be at least 1");

  const StochasticProblem& problem = *built.problem;
  const auto names = algorithm_names(
      cfg, {"vr_sgd", "vr_accelerated", "vr_heavy_ball"});

  std::vector<std::vector<std::string>> summary_rows;
  std::size_t unit = 0;
  for (const std::string& name : names) {
    const ResolvedAlg alg = resolve_algorithm(name, cfg, problem);
    if (alg.kind == AlgorithmKind::BaselineSgd) {
      config_fail("algorithms",
                  "rates covers the batched methods; use compare for "
                  "baseline_sgd");
    }
    const BatchSchedule& schedule = *alg.schedule;
    const ErrorCurves curves =
        error_curves(problem, alg, built.x0, steps, trajectories,
                     options.seed, unit * kUnitStride, options.workers,
                     nullptr);

    std::ostringstream csv;
    csv << "k,N_k,cum_oracle,mean_err,mse,theory_bound\n";
    for (std::int64_t k = 0; k <= steps; ++k) {
      const std::int64_t batch = k < steps ? schedule.batch_size(k) : 0;
      const double bound =
          mse_upper_bound(alg.kind, schedule, k, problem.eta(), problem.lip(),
                          alg.hyper.alpha, built.nu_sq, built.e0_sq);
      csv << k << ',' << batch << ',' << schedule.cumulative_oracle_calls(k)
          << ',' << fmt(curves.mean_err[static_cast<std::size_t>(k)]) << ','
          << fmt(curves.mse[static_cast<std::size_t>(k)]) << ',' << fmt(bound)
          << '\n';
    }
    sink->write("rates_" + name + ".csv", csv.str());

    summary_rows.push_back(
        {name, std::to_string(steps),
         fmt4(curves.mse[static_cast<std::size_t>(steps)]),
         fmt4(mse_upper_bound(alg.kind, schedule, steps, problem.eta(),
                              problem.lip(), alg.hyper.alpha, built.nu_sq,
                              built.e0_sq))});
    ++unit;
  }

  if (!options.quiet) {
    std::cout << "rates (seed " << options.seed << ")\n";
    print_table({"algorithm", "steps", "final_mse", "final_bound"},
                summary_rows);
  }
}

void run_clt(const json& cfg, const BuiltProblem& built,
             const ExperimentOptions& options, OutputSink* sink) {
  check_top_level(cfg, "clt",
                  {"algorithms", "alpha", "beta", "schedule", "replications",
                   "steps", "sigma_tol", "stacked_output"});
  const int replications =
      static_cast<int>(get_integer(cfg, "", "replications", 2000));
  if (replications < 2) config_fail("replications", "must be at least 2");
  const std::int64_t steps = get_integer(cfg, "", "steps", 50);
  if (steps < 1) config_fail("steps", "must be at least 1");
  const bool stacked_output = get_bool(cfg, "", "stacked_output", false);

  const StochasticProblem& problem = *built.problem;
  const Matrix hess = problem.hessian_at_opt();
  const int m = problem.dim();
  const auto names = algorithm_names(
      cfg, {"vr_sgd", "vr_accelerated", "vr_heavy_ball"});

  std::vector<std::vector<std::string>> summary_rows;
  std::size_t unit = 0;
  for (const std::string& name : names) {
    const ResolvedAlg alg = resolve_algorithm(name, cfg, problem);
    if (alg.kind == AlgorithmKind::BaselineSgd) {
      config_fail("algorithms", "clt covers the batched methods");
    }
    const BatchSchedule& schedule = *alg.schedule;
    const bool stacked = alg.kind != AlgorithmKind::VrSgd;

    const double sigma_tol = get_number(
        cfg, "", "sigma_tol",
        schedule.kind() == ScheduleKind::Geometric ? 1e-12 : 1e-5);

    const ReplicationEnsemble ens = run_ensemble(
        problem, alg.solver, &schedule, built.x0, steps, replications,
        options.seed, unit * kUnitStride, options.workers, stacked);
    const std::vector<Vector> rescaled = rescaled_errors(ens, problem.x_star());

    const LimitCovariance limit =
        rescaled_error_limit(alg.kind, schedule, alg.hyper.alpha, hess,
                             built.s0_at_opt, sigma_tol);

    const bool marginal = stacked && !stacked_output;
    std::vector<Vector> used;
    used.reserve(rescaled.size());
    if (marginal) {
      for (const Vector& e : rescaled) {
        used.emplace_back(e.begin(), e.begin() + m);
      }
    } else {
      used = rescaled;
    }
    const Matrix sigma_used =
        marginal ? limit.sigma.block(0, 0, m, m) : limit.sigma;
    const CltReport report = clt_diagnostics(used, sigma_used);

    // Samples CSV, one row per replication.
    const int d = static_cast<int>(used.front().size());
    std::ostringstream samples_csv;
    samples_csv << "rep";
    for (int j = 0; j < d; ++j) samples_csv << ",e_" << j;
    samples_csv << '\n';
    for (std::size_t i = 0; i < used.size(); ++i) {
      samples_csv << i;
      for (int j = 0; j < d; ++j) {
        samples_csv << ',' << fmt(used[i][static_cast<std::size_t>(j)]);
      }
      samples_csv << '\n';
    }
    sink->write("clt_samples_" + name + ".csv", samples_csv.str());

    // Histograms CSV across coordinates.
    std::ostringstream hist_csv;
    hist_csv << "coord,bin_lo,bin_hi,count\n";
    for (int j = 0; j < d; ++j) {
      std::vector<double> column;
      column.reserve(used.size());
      for (const Vector& e : used) {
        column.push_back(e[static_cast<std::size_t>(j)]);
      }
      const Histogram hist = freedman_diaconis_histogram(std::move(column));
      for (std::size_t b = 0; b + 1 < hist.edges.size(); ++b) {
        hist_csv << j << ',' << fmt(hist.edges[b]) << ','
                 << fmt(hist.edges[b + 1]) << ',' << hist.counts[b] << '\n';
      }
    }
    sink->write("clt_histograms_" + name + ".csv", hist_csv.str());

    json diag;
    diag["algorithm"] = name;
    diag["replications"] = replications;
    diag["steps"] = steps;
    diag["seed"] = options.seed;
    diag["stacked"] = stacked;
    diag["marginal_of_stacked"] = marginal;
    diag["sigma_theory"] = matrix_to_json(sigma_used);
    diag["sigma_construction"] =
        limit.construction == LimitCovariance::Construction::Lyapunov
            ? "lyapunov"
            : "truncated_polynomial";
    diag["sigma_residual"] = limit.residual;
    diag["sigma_terms_used"] = limit.terms_used;
    diag["empirical_cov"] = matrix_to_json(report.empirical_cov);
    diag["cov_rel_frobenius"] = report.cov_rel_frobenius;
    diag["coord_mean"] = vector_to_json(report.coord_mean);
    diag["coord_skewness"] = vector_to_json(report.coord_skewness);
    diag["coord_excess_kurtosis"] = vector_to_json(report.coord_excess_kurtosis);
    diag["ks_statistic"] = vector_to_json(report.ks_statistic);
    diag["ks_critical_1pct"] = report.ks_critical_1pct;
    diag["all_ks_below_critical"] = report.all_ks_below_critical;

    // Companion radius bound for the record. The unscaled heavy-ball bound
    // is sqrt(beta) directly; the other cases carry a labeled companion.
    {
      const bool geometric = schedule.kind() == ScheduleKind::Geometric;
      double radius_bound;
      if (!geometric && alg.kind == AlgorithmKind::VrHeavyBall) {
        radius_bound = std::sqrt(alg.hyper.beta);
      } else {
        CompanionLabel label;
        switch (alg.kind) {
          case AlgorithmKind::VrSgd:
            label = geometric ? CompanionLabel::P1 : CompanionLabel::A;
            break;
          case AlgorithmKind::VrAccelerated:
            label = geometric ? CompanionLabel::P2 : CompanionLabel::H2;
            break;
          default:
            label = CompanionLabel::P3;
            break;
        }
        radius_bound = companion_matrix(label, alg.hyper.alpha, alg.hyper.beta,
                                        geometric ? schedule.rate() : 0.5,
                                        hess)
                           .norm_bound;
      }
      diag["companion_radius_bound"] = radius_bound;
    }

    if (alg.kind == AlgorithmKind::VrSgd) {
      // Delta-method diagnostics: rescaled gradient covariance and the mean
      // rescaled suboptimality gap against (1/2) tr(H Sigma).
      const DeltaMethod delta = delta_method_covariances(hess, sigma_used);
      std::vector<Vector> grad_samples;
      grad_samples.reserve(used.size());
      std::vector<double> gaps;
      gaps.reserve(used.size());
      for (const Vector& e : used) {
        const Vector he = hess * e;
        grad_samples.push_back(he);
        gaps.push_back(0.5 * vec_dot(e, he));
      }
      auto [grad_mean, grad_cov] = mean_and_covariance(grad_samples);
      (void)grad_mean;
      const SampleMoments gap_moments = sample_moments(gaps);
      diag["grad_cov_theory"] = matrix_to_json(delta.grad_cov);
      diag["grad_cov_empirical"] = matrix_to_json(grad_cov);
      diag["grad_cov_rel_frobenius"] =
          relative_frobenius_distance(grad_cov, delta.grad_cov);
      diag["gap_mean_theory"] = delta.subopt_mean;
      diag["gap_mean_empirical"] = gap_moments.mean;
      diag["gap_mean_se"] =
          std::sqrt(gap_moments.variance / static_cast<double>(used.size()));
    }

    sink->write("clt_diagnostics_" + name + ".json", diag.dump(2) + "\n");

    summary_rows.push_back({name, fmt4(report.cov_rel_frobenius),
                            fmt4(*std::max_element(
                                report.ks_statistic.begin(),
                                report.ks_statistic.end())),
                            fmt4(report.ks_critical_1pct),
                            report.all_ks_below_critical ? "yes" : "no"});
    ++unit;
  }

  if (!options.quiet) {
    std::cout << "clt (seed " << options.seed << ")\n";
    print_table({"algorithm", "cov_rel_frob", "max_ks", "ks_crit", "normal"},
                summary_rows);
  }
}

void run_coverage(const json& cfg, const BuiltProblem& built,
                  const ExperimentOptions& options, OutputSink* sink) {
  check_top_level(cfg, "coverage",
                  {"algorithms", "alpha", "beta", "schedule", "n_grid",
                   "budget_grid", "delta", "meta_reps", "baseline_c",
                   "baseline_matrix_step"});
  std::vector<std::int64_t> n_grid{6, 8, 10, 15};
  if (cfg.contains("n_grid")) {
    const json& v = cfg.at("n_grid");
    if (!v.is_array() || v.empty()) config_fail("n_grid", "expected an array");
    n_grid.clear();
    for (const json& e : v) {
      if (!e.is_number_integer()) config_fail("n_grid", "expected integers");
      n_grid.push_back(e.get<std::int64_t>());
    }
  }
  std::vector<std::int64_t> budget_grid{1000};
  if (cfg.contains("budget_grid")) {
    const json& v = cfg.at("budget_grid");
    if (!v.is_array() || v.empty()) {
      config_fail("budget_grid", "expected an array");
    }
    budget_grid.clear();
    for (const json& e : v) {
      if (!e.is_number_integer()) {
        config_fail("budget_grid", "expected integers");
      }
      budget_grid.push_back(e.get<std::int64_t>());
    }
  }
  const double delta = get_number(cfg, "", "delta", 0.05);
  if (!(delta > 0.0 && delta < 1.0)) config_fail("delta", "must be in (0,1)");
  const int meta_reps =
      static_cast<int>(get_integer(cfg, "", "meta_reps", 1000));
  if (meta_reps < 1) config_fail("meta_reps", "must be at least 1");

  const StochasticProblem& problem = *built.problem;
  const auto names = algorithm_names(
      cfg, {"vr_sgd", "vr_accelerated", "vr_heavy_ball"});

  struct Cell {
    std::string algorithm;
    std::int64_t n;
    std::int64_t budget;
    CoverageResult result;
  };
  std::vector<Cell> cells;
  std::uint64_t unit = 0;
  for (const std::string& name : names) {
    const ResolvedAlg alg = resolve_algorithm(name, cfg, problem);
    for (std::int64_t budget : budget_grid) {
      for (std::int64_t n : n_grid) {
        Cell cell;
        cell.algorithm = name;
        cell.n = n;
        cell.budget = budget;
        cell.result = coverage_experiment(
            problem, alg.solver,
            alg.schedule ? *alg.schedule : geometric_schedule(0.5),
            built.x0, static_cast<int>(n), budget, delta, meta_reps,
            options.seed, unit * kUnitStride, options.workers);
        cells.push_back(std::move(cell));
        ++unit;
      }
    }
  }

  // Rows sorted by (N_max, n, algorithm) to mirror the grid layout.
  std::stable_sort(cells.begin(), cells.end(),
                   [](const Cell& a, const Cell& b) {
                     if (a.budget != b.budget) return a.budget < b.budget;
                     if (a.n != b.n) return a.n < b.n;
                     return a.algorithm < b.algorithm;
                   });

  std::ostringstream csv;
  csv << "algorithm,n,N_max,delta,meta_reps,steps,oracle_calls,coverage,"
         "half_width,mean_volume\n";
  json report = json::array();
  std::vector<std::vector<std::string>> summary_rows;
  for (const Cell& cell : cells) {
    double mean_volume = 0.0;
    for (double v : cell.result.volumes) mean_volume += v;
    mean_volume /= static_cast<double>(cell.result.volumes.size());
    csv << cell.algorithm << ',' << cell.n << ',' << cell.budget << ','
        << fmt(delta) << ',' << meta_reps << ',' << cell.result.steps << ','
        << cell.result.oracle_calls_per_replication << ','
        << fmt(cell.result.coverage) << ',' << fmt(cell.result.half_width)
        << ',' << fmt(mean_volume) << '\n';

    json entry;
    entry["algorithm"] = cell.algorithm;
    entry["n"] = cell.n;
    entry["N_max"] = cell.budget;
    entry["delta"] = delta;
    entry["coverage"] = cell.result.coverage;
    entry["half_width"] = cell.result.half_width;
    entry["meta_reps"] = meta_reps;
    entry["seed"] = options.seed;
    entry["steps"] = cell.result.steps;
    entry["oracle_calls"] = cell.result.oracle_calls_per_replication;
    entry["mean_volume"] = mean_volume;
    report.push_back(entry);

    summary_rows.push_back({cell.algorithm, std::to_string(cell.n),
                            std::to_string(cell.budget),
                            fmt4(cell.result.coverage),
                            fmt4(cell.result.half_width)});
  }
  sink->write("coverage.csv", csv.str());
  sink->write("coverage.json", report.dump(2) + "\n");

  if (!options.quiet) {
    std::cout << "coverage (seed " << options.seed << ", delta " << fmt4(delta)
              << ", meta_reps " << meta_reps << ")\n";
    print_table({"algorithm", "n", "N_max", "coverage", "half_width"},
                summary_rows);
  }
}

void run_compare(const json& cfg, const BuiltProblem& built,
                 const ExperimentOptions& options, OutputSink* sink) {
  check_top_level(cfg, "compare",
                  {"algorithms", "alpha", "beta", "schedule", "trajectories",
                   "steps", "include_baseline", "baseline_c",
                   "baseline_matrix_step", "baseline_max_steps"});
  const int trajectories =
      static_cast<int>(get_integer(cfg, "", "trajectories", 50));
  if (trajectories < 1) config_fail("trajectories", "must be at least 1");
  const std::int64_t steps = get_integer(cfg, "", "steps", 25);
  if (steps < 1) config_fail("steps", "must be at least 1");
  const bool include_baseline = get_bool(cfg, "", "include_baseline", true);
  const std::int64_t baseline_max_steps =
      get_integer(cfg, "", "baseline_max_steps", 1000000);
  if (baseline_max_steps < 1) {
    config_fail("baseline_max_steps", "must be at least 1");
  }

  const StochasticProblem& problem = *built.problem;
  const auto names = algorithm_names(
      cfg, {"vr_sgd", "vr_accelerated", "vr_heavy_ball"});

  std::ostringstream csv;
  csv << "algorithm,k,batch,cum_oracle,mean_err,mse\n";
  std::vector<std::vector<std::string>> summary_rows;

  std::int64_t max_budget = 0;
  std::size_t unit = 0;
  for (const std::string& name : names) {
    const ResolvedAlg alg = resolve_algorithm(name, cfg, problem);
    if (alg.kind == AlgorithmKind::BaselineSgd) {
      config_fail("algorithms",
                  "list baseline via include_baseline, not algorithms");
    }
    const BatchSchedule& schedule = *alg.schedule;
    const ErrorCurves curves =
        error_curves(problem, alg, built.x0, steps, trajectories,
                     options.seed, unit * kUnitStride, options.workers,
                     nullptr);
    for (std::int64_t k = 0; k <= steps; ++k) {
      const std::int64_t batch = k < steps ? schedule.batch_size(k) : 0;
      csv << name << ',' << k << ',' << batch << ','
          << schedule.cumulative_oracle_calls(k) << ','
          << fmt(curves.mean_err[static_cast<std::size_t>(k)]) << ','
          << fmt(curves.mse[static_cast<std::size_t>(k)]) << '\n';
    }
    max_budget =
        std::max(max_budget, schedule.cumulative_oracle_calls(steps));
    summary_rows.push_back(
        {name, std::to_string(schedule.cumulative_oracle_calls(steps)),
         fmt4(curves.mse[static_cast<std::size_t>(steps)])});
    ++unit;
  }

  if (include_baseline) {
    const ResolvedAlg alg = resolve_algorithm("baseline_sgd", cfg, problem);
    const std::int64_t base_steps = std::min(
        std::max<std::int64_t>(max_budget, 1), baseline_max_steps);
    // Checkpoints at powers of two: the curve is read on a log axis.
    std::vector<std::int64_t> checkpoints{0};
    for (std::int64_t k = 1; k < base_steps; k *= 2) checkpoints.push_back(k);
    checkpoints.push_back(base_steps);
    const ErrorCurves curves =
        error_curves(problem, alg, built.x0, base_steps, trajectories,
                     options.seed, unit * kUnitStride, options.workers,
                     &checkpoints);
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
      csv << "baseline_sgd," << checkpoints[i] << ",1," << checkpoints[i]
          << ',' << fmt(curves.mean_err[i]) << ',' << fmt(curves.mse[i])
          << '\n';
    }
    summary_rows.push_back({"baseline_sgd", std::to_string(base_steps),
                            fmt4(curves.mse.back())});
  }

  sink->write("compare.csv", csv.str());

  if (!options.quiet) {
    std::cout << "compare (seed " << options.seed << ")\n";
    print_table({"algorithm", "oracle_calls", "final_mse"}, summary_rows);
  }
}

}  // namespace

std::vector<std::string> run_experiment(
    const std::string& experiment, const std::string& config_text,
    const std::vector<std::string>& overrides,
    const ExperimentOptions& options) {
  json cfg = parse_config_text(config_text);
  for (const std::string& assignment : overrides) {
    apply_override(cfg, assignment);
  }

  BuiltProblem built = build_problem(cfg);
  OutputSink sink;
  sink.dir = options.out_dir;

  if (experiment == "rates") {
    run_rates(cfg, built, options, &sink);
  } else if (experiment == "clt") {
    run_clt(cfg, built, options, &sink);
  } else if (experiment == "coverage") {
    run_coverage(cfg, built, options, &sink);
  } else if (experiment == "compare") {
    run_compare(cfg, built, options, &sink);
  } else {
    throw ConfigError("unknown experiment '" + experiment +
                      "' (expected rates, clt, coverage, or compare)");
  }
  return sink.written;
}

}  // namespace vrclt
