#pragma once

#include <cstdint>
#include <vector>

#include "vrclt/matrix.hpp"
#include "vrclt/schedules.hpp"
#include "vrclt/solvers.hpp"
#include "vrclt/stats.hpp"

namespace vrclt {

// Terminal iterates of n independent solver replications, plus the scaling
// metadata needed to map them to the limit regime. Stacked ensembles hold
// (state_k, state_{k-1}) concatenated, dimension 2m.
struct ReplicationEnsemble {
  AlgorithmKind kind = AlgorithmKind::VrSgd;
  int dim = 0;  // length of each stored sample (m, or 2m when stacked)
  int state_dim = 0;  // m
  bool stacked = false;
  std::int64_t step_index = 0;
  ScheduleKind schedule_kind = ScheduleKind::Geometric;
  double rate = 0.0;   // rho (geometric) or v (polynomial)
  double alpha = 0.0;
  std::vector<Vector> samples;
  std::int64_t oracle_calls_per_replication = 0;
};

// Runs n identically configured replications from x0 with stream ids
// stream_base, stream_base+1, ..., concurrently on `workers` threads.
// Results land in index order, so output is worker-count independent.
ReplicationEnsemble run_ensemble(const StochasticProblem& problem,
                                 const SolverConfig& config,
                                 const BatchSchedule* schedule,
                                 const Vector& x0, std::int64_t steps, int n,
                                 std::uint64_t seed, std::uint64_t stream_base,
                                 int workers, bool stacked);

// Sample mean and unbiased covariance of the ensemble members.
void ensemble_mean_cov(const ReplicationEnsemble& ensemble, Vector* mean,
                       Matrix* cov);

// n (mean - x)' S^{-1} (mean - x) via Cholesky solves. Throws
// SingularCovariance when S has no Cholesky factor (degenerate ensemble or
// too few replications).
double hotelling_statistic(const Vector& mean, const Matrix& cov_s,
                           std::int64_t n, const Vector& x);

// Ellipsoid {x : n (mean-x)' S^{-1} (mean-x) <= threshold} with
// threshold = m (n-1)/(n-m) f_quantile(m, n-m, 1-delta).
struct ConfidenceRegion {
  Vector center;
  Matrix shape;  // S, the ensemble covariance
  std::int64_t n = 0;
  int m = 0;
  double delta = 0.0;
  double f_quantile_value = 0.0;
  double threshold = 0.0;

  bool contains(const Vector& x) const;
  // Lebesgue volume: V_m (threshold/n)^{m/2} sqrt(det S).
  double volume() const;
};

// Throws TooFewReplicates when n <= m and SingularCovariance when the
// ensemble covariance is degenerate.
ConfidenceRegion confidence_region(const std::vector<Vector>& samples,
                                   double delta);

// Rescaled errors e_i mapping the terminal states to the limit regime:
// geometric alpha^{-1} rho^{-k/2} (state - x*), polynomial
// alpha^{-1} k^{v/2} (state - x*). Stacked ensembles subtract (x*, x*).
std::vector<Vector> rescaled_errors(const ReplicationEnsemble& ensemble,
                                    const Vector& x_star);

// Normality diagnostics of rescaled samples against a theoretical limit
// covariance: per-coordinate moments, per-coordinate Kolmogorov-Smirnov
// statistics after standardizing by the theoretical standard deviation, and
// the relative Frobenius distance of the empirical covariance.
struct CltReport {
  std::int64_t n = 0;
  Vector coord_mean;
  Vector coord_skewness;
  Vector coord_excess_kurtosis;
  Vector ks_statistic;
  Matrix empirical_cov;
  double cov_rel_frobenius = 0.0;
  double ks_critical_1pct = 0.0;  // asymptotic 1% critical value 1.63/sqrt(n)
  bool all_ks_below_critical = false;
};
CltReport clt_diagnostics(const std::vector<Vector>& samples,
                          const Matrix& sigma_theory);

// One coverage cell: meta_reps independent experiments, each building a
// confidence region from n replications stopped at the first step where
// cumulative oracle calls reach budget (the final batch is spent in full),
// then checking whether the region contains x*.
struct CoverageResult {
  double coverage = 0.0;
  double half_width = 0.0;  // 1.96 sqrt(p(1-p)/meta_reps)
  std::int64_t steps = 0;
  std::int64_t oracle_calls_per_replication = 0;
  std::vector<double> volumes;  // one region volume per meta-replication
};

// Stream id of replication i of meta-rep r is
// stream_base + r * 2^16 + i, so cells, meta-reps, and replications never
// collide for n < 2^16.
CoverageResult coverage_experiment(const StochasticProblem& problem,
                                   const SolverConfig& config,
                                   const BatchSchedule& schedule,
                                   const Vector& x0, int n,
                                   std::int64_t budget, double delta,
                                   int meta_reps, std::uint64_t seed,
                                   std::uint64_t stream_base, int workers);

}  // namespace vrclt
