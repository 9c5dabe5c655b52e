#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "vrclt/algorithm_kind.hpp"
#include "vrclt/problems.hpp"
#include "vrclt/schedules.hpp"

namespace vrclt {

// Step size and derived constants for one method on one problem.
//   vr_sgd:         x_{k+1} = x_k - alpha g_k,                 alpha in (0, 2/(eta+lip)]
//   vr_accelerated: y_{k+1} = x_k - alpha g_k,
//                   x_{k+1} = y_{k+1} + beta (y_{k+1} - y_k),  alpha in (0, 1/lip]
//   vr_heavy_ball:  x_{k+1} = x_k - alpha g_k + beta (x_k - x_{k-1}),
//                                                              alpha in (0, 4/lip)
// g_k is the batch gradient at the current x. beta and the per-step
// mean-square contraction base are functions of alpha:
//   vr_sgd:         contraction q = 1 - 2 alpha eta lip / (eta + lip)
//   vr_accelerated: gamma = sqrt(alpha eta), beta = (1-gamma)/(1+gamma),
//                   contraction 1 - gamma
//   vr_heavy_ball:  beta = max(|1-sqrt(alpha eta)|, |1-sqrt(alpha lip)|)^2,
//                   contraction beta
struct Hyperparameters {
  AlgorithmKind kind = AlgorithmKind::VrSgd;
  double alpha = 0.0;
  double beta = 0.0;         // 0 for vr_sgd and baseline_sgd
  double gamma = 0.0;        // vr_accelerated only
  double contraction = 0.0;  // in [0, 1)
};

// Throws InadmissibleAlpha when alpha is outside the ranges above.
Hyperparameters derive_hyperparameters(AlgorithmKind kind, double eta,
                                       double lip, double alpha);
// alpha = 2/(eta+lip), 1/lip, or 4/(sqrt(eta)+sqrt(lip))^2 respectively.
Hyperparameters default_hyperparameters(AlgorithmKind kind, double eta,
                                        double lip);

struct SolverConfig {
  AlgorithmKind kind = AlgorithmKind::VrSgd;
  // 0 selects the method default for the problem at hand.
  double alpha = 0.0;
  // When set, must equal the value derived from alpha to within 1e-9;
  // beta is not a free parameter for these methods.
  std::optional<double> beta;
  // baseline_sgd step is baseline_c / (k+1), or hessian^{-1}/(k+1) when
  // baseline_matrix_step is set (quadratic problems only).
  double baseline_c = 1.0;
  bool baseline_matrix_step = false;
};

struct Trajectory {
  AlgorithmKind kind = AlgorithmKind::VrSgd;
  Hyperparameters hyper;
  std::int64_t steps = 0;
  std::int64_t oracle_calls = 0;
  // The sequence the limit theory tracks: x_k for vr_sgd, vr_heavy_ball and
  // baseline_sgd, y_k for vr_accelerated. Index 0 is the start point.
  // Holds every step when store_path was requested, or the states at the
  // requested record_at indices (in their given order).
  std::vector<Vector> states;
  Vector final_state;     // state at index steps
  Vector previous_state;  // state at index steps-1 (start point when steps=0)
};

// Runs `steps` iterations from x0. schedule supplies per-step batch sizes for
// the variance-reduced methods and must be null for baseline_sgd, which draws
// one fresh sample per step. record_at, when given, is a sorted list of step
// indices in [0, steps] whose states are kept (long runs keep checkpoints
// without storing the whole path); mutually exclusive with store_path.
Trajectory run_solver(const StochasticProblem& problem,
                      const SolverConfig& config, const BatchSchedule* schedule,
                      const Vector& x0, std::int64_t steps, RngStream& rng,
                      bool store_path = false,
                      const std::vector<std::int64_t>* record_at = nullptr);

}  // namespace vrclt
