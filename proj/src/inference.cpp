#include "vrclt/inference.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "vrclt/errors.hpp"
#include "vrclt/parallel.hpp"
#include "vrclt/special_functions.hpp"

namespace vrclt {

ReplicationEnsemble run_ensemble(const StochasticProblem& problem,
                                 const SolverConfig& config,
                                 const BatchSchedule* schedule,
                                 const Vector& x0, std::int64_t steps, int n,
                                 std::uint64_t seed, std::uint64_t stream_base,
                                 int workers, bool stacked) {
  if (n < 1) throw ConfigError("need at least one replication");

  ReplicationEnsemble ens;
  ens.kind = config.kind;
  ens.state_dim = problem.dim();
  ens.stacked = stacked;
  ens.dim = stacked ? 2 * problem.dim() : problem.dim();
  ens.step_index = steps;
  if (config.kind == AlgorithmKind::BaselineSgd) {
    ens.schedule_kind = ScheduleKind::Geometric;
    ens.rate = 1.0;
    ens.alpha = 1.0;
  } else {
    if (schedule == nullptr) {
      throw ConfigError("variance-reduced methods need a batch schedule");
    }
    ens.schedule_kind = schedule->kind();
    ens.rate = schedule->rate();
  }
  ens.samples.assign(static_cast<std::size_t>(n), Vector());

  std::int64_t oracle_calls = 0;
  double alpha_used = ens.alpha;
  std::mutex meta_mutex;
  bool meta_recorded = false;

  parallel_for(n, workers, [&](std::int64_t i) {
    RngStream rng(seed, stream_base + static_cast<std::uint64_t>(i));
    const Trajectory traj =
        run_solver(problem, config, schedule, x0, steps, rng, false);
    ens.samples[static_cast<std::size_t>(i)] =
        stacked ? vec_concat(traj.final_state, traj.previous_state)
                : traj.final_state;
    std::lock_guard<std::mutex> lock(meta_mutex);
    if (!meta_recorded) {
      oracle_calls = traj.oracle_calls;
      if (config.kind != AlgorithmKind::BaselineSgd) {
        alpha_used = traj.hyper.alpha;
      }
      meta_recorded = true;
    }
  });

  ens.oracle_calls_per_replication = oracle_calls;
  ens.alpha = alpha_used;
  return ens;
}

void ensemble_mean_cov(const ReplicationEnsemble& ensemble, Vector* mean,
                       Matrix* cov) {
  auto [m, s] = mean_and_covariance(ensemble.samples);
  *mean = std::move(m);
  *cov = std::move(s);
}

double hotelling_statistic(const Vector& mean, const Matrix& cov_s,
                           std::int64_t n, const Vector& x) {
  if (mean.size() != x.size() ||
      cov_s.rows() != static_cast<int>(mean.size())) {
    throw ConfigError("dimension mismatch in hotelling statistic");
  }
  const Vector d = vec_sub(mean, x);
  CholeskyFactor chol;
  try {
    chol = cholesky(cov_s);
  } catch (const NotPositiveDefinite&) {
    throw SingularCovariance(
        "ensemble covariance is singular (degenerate ensemble or n <= m)");
  }
  return static_cast<double>(n) * vec_dot(d, chol.solve(d));
}

bool ConfidenceRegion::contains(const Vector& x) const {
  return hotelling_statistic(center, shape, n, x) <= threshold;
}

double ConfidenceRegion::volume() const {
  CholeskyFactor chol;
  try {
    chol = cholesky(shape);
  } catch (const NotPositiveDefinite&) {
    throw SingularCovariance("region shape is singular");
  }
  const double md = static_cast<double>(m);
  const double log_unit_ball =
      0.5 * md * std::log(std::numbers::pi) - std::lgamma(0.5 * md + 1.0);
  const double log_vol = log_unit_ball +
                         0.5 * md * std::log(threshold / static_cast<double>(n)) +
                         0.5 * chol.log_det();
  return std::exp(log_vol);
}

ConfidenceRegion confidence_region(const std::vector<Vector>& samples,
                                   double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ConfigError("delta must lie in (0,1)");
  }
  const std::int64_t n = static_cast<std::int64_t>(samples.size());
  if (n < 2) throw TooFewReplicates("need at least 2 replications");
  const int m = static_cast<int>(samples.front().size());
  if (n <= m) {
    throw TooFewReplicates("need n >= m+1 replications, got n = " +
                           std::to_string(n) + " for dimension " +
                           std::to_string(m));
  }

  ConfidenceRegion region;
  region.n = n;
  region.m = m;
  region.delta = delta;
  auto [mean, cov] = mean_and_covariance(samples);
  region.center = std::move(mean);
  region.shape = std::move(cov);
  region.f_quantile_value =
      f_quantile(static_cast<double>(m), static_cast<double>(n - m),
                 1.0 - delta);
  region.threshold = static_cast<double>(m) * static_cast<double>(n - 1) /
                     static_cast<double>(n - m) * region.f_quantile_value;
  // Fail now, not at the first membership query, if S is degenerate.
  try {
    cholesky(region.shape);
  } catch (const NotPositiveDefinite&) {
    throw SingularCovariance("ensemble covariance is singular");
  }
  return region;
}

std::vector<Vector> rescaled_errors(const ReplicationEnsemble& ensemble,
                                    const Vector& x_star) {
  if (ensemble.kind == AlgorithmKind::BaselineSgd) {
    throw ConfigError("rescaled errors are defined for the batched methods");
  }
  if (static_cast<int>(x_star.size()) != ensemble.state_dim) {
    throw ConfigError("x_star has wrong dimension");
  }
  const Vector target =
      ensemble.stacked ? vec_concat(x_star, x_star) : x_star;
  const double k = static_cast<double>(ensemble.step_index);
  const double scale =
      (ensemble.schedule_kind == ScheduleKind::Geometric
           ? std::pow(ensemble.rate, -0.5 * k)
           : std::pow(k, 0.5 * ensemble.rate)) /
      ensemble.alpha;
  std::vector<Vector> out;
  out.reserve(ensemble.samples.size());
  for (const Vector& s : ensemble.samples) {
    out.push_back(vec_scale(vec_sub(s, target), scale));
  }
  return out;
}

CltReport clt_diagnostics(const std::vector<Vector>& samples,
                          const Matrix& sigma_theory) {
  const std::int64_t n = static_cast<std::int64_t>(samples.size());
  if (n < 2) throw ConfigError("need at least 2 samples for diagnostics");
  const int m = static_cast<int>(samples.front().size());
  if (sigma_theory.rows() != m || sigma_theory.cols() != m) {
    throw ConfigError("sigma_theory has wrong dimension");
  }

  CltReport report;
  report.n = n;
  auto [mean, cov] = mean_and_covariance(samples);
  (void)mean;  // per-coordinate means come from sample_moments below
  report.empirical_cov = std::move(cov);
  report.cov_rel_frobenius =
      relative_frobenius_distance(report.empirical_cov, sigma_theory);
  report.ks_critical_1pct = 1.63 / std::sqrt(static_cast<double>(n));

  report.coord_mean.resize(static_cast<std::size_t>(m));
  report.coord_skewness.resize(static_cast<std::size_t>(m));
  report.coord_excess_kurtosis.resize(static_cast<std::size_t>(m));
  report.ks_statistic.resize(static_cast<std::size_t>(m));
  report.all_ks_below_critical = true;

  Vector column(static_cast<std::size_t>(n));
  for (int j = 0; j < m; ++j) {
    for (std::int64_t i = 0; i < n; ++i) {
      column[static_cast<std::size_t>(i)] =
          samples[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    const SampleMoments moments = sample_moments(column);
    report.coord_mean[static_cast<std::size_t>(j)] = moments.mean;
    report.coord_skewness[static_cast<std::size_t>(j)] = moments.skewness;
    report.coord_excess_kurtosis[static_cast<std::size_t>(j)] =
        moments.excess_kurtosis;

    const double var_theory = sigma_theory(j, j);
    double ks = 1.0;
    if (var_theory > 0.0) {
      const double sd = std::sqrt(var_theory);
      Vector standardized(column);
      for (double& x : standardized) x /= sd;
      ks = ks_statistic(standardized, normal_cdf);
    }
    report.ks_statistic[static_cast<std::size_t>(j)] = ks;
    if (!(ks < report.ks_critical_1pct)) report.all_ks_below_critical = false;
  }
  return report;
}

CoverageResult coverage_experiment(const StochasticProblem& problem,
                                   const SolverConfig& config,
                                   const BatchSchedule& schedule,
                                   const Vector& x0, int n,
                                   std::int64_t budget, double delta,
                                   int meta_reps, std::uint64_t seed,
                                   std::uint64_t stream_base, int workers) {
  if (meta_reps < 1) throw ConfigError("need at least one meta-replication");
  if (n <= problem.dim()) {
    throw TooFewReplicates("need n >= m+1 replications");
  }

  CoverageResult result;
  const bool baseline = config.kind == AlgorithmKind::BaselineSgd;
  result.steps = baseline ? budget : schedule.steps_for_budget(budget);
  result.oracle_calls_per_replication =
      baseline ? budget : schedule.cumulative_oracle_calls(result.steps);
  result.volumes.assign(static_cast<std::size_t>(meta_reps), 0.0);

  std::vector<char> covered(static_cast<std::size_t>(meta_reps), 0);
  const Vector& x_star = problem.x_star();

  parallel_for(meta_reps, workers, [&](std::int64_t r) {
    std::vector<Vector> samples;
    samples.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const std::uint64_t stream =
          stream_base + (static_cast<std::uint64_t>(r) << 16) +
          static_cast<std::uint64_t>(i);
      RngStream rng(seed, stream);
      const Trajectory traj = run_solver(
          problem, config, baseline ? nullptr : &schedule, x0, result.steps,
          rng, false);
      samples.push_back(traj.final_state);
    }
    const ConfidenceRegion region = confidence_region(samples, delta);
    covered[static_cast<std::size_t>(r)] = region.contains(x_star) ? 1 : 0;
    result.volumes[static_cast<std::size_t>(r)] = region.volume();
  });

  std::int64_t hits = 0;
  for (char c : covered) hits += c;
  const double p = static_cast<double>(hits) / static_cast<double>(meta_reps);
  result.coverage = p;
  result.half_width =
      1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(meta_reps));
  return result;
}

}  // namespace vrclt
