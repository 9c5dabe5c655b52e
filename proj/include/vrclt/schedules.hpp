#pragma once

#include <cstdint>
#include <optional>

#include "vrclt/algorithm_kind.hpp"

namespace vrclt {

enum class ScheduleKind { Geometric, Polynomial };

// Per-step batch sizes for the variance-reduced methods.
//
// Geometric: N_k = ceil(rate^-(k+1)) for rate in (0,1).
// Polynomial: N_k = ceil((k+1)^rate) for rate > 0.
//
// Geometric sizes are computed by iterated long-double multiplication with a
// correction step so the ceiling is exact at representable boundaries. Sizes
// or cumulative sums that would exceed 2^62 raise ScheduleOverflow. An
// optional cap clips every batch to cap; cap_binds_by reports whether the
// clip is active within a horizon so callers can surface the diagnostic.
class BatchSchedule {
 public:
  BatchSchedule(ScheduleKind kind, double rate,
                std::optional<std::int64_t> cap = std::nullopt);

  ScheduleKind kind() const { return kind_; }
  double rate() const { return rate_; }
  std::optional<std::int64_t> cap() const { return cap_; }

  // N_k with the cap applied. k >= 0.
  std::int64_t batch_size(std::int64_t k) const;
  std::int64_t uncapped_batch_size(std::int64_t k) const;
  bool cap_binds_by(std::int64_t steps) const;

  // sum_{k=0}^{steps-1} batch_size(k).
  std::int64_t cumulative_oracle_calls(std::int64_t steps) const;

  // Smallest K with cumulative_oracle_calls(K) >= budget. The final step
  // still draws its full batch, so the realized spend may exceed budget.
  std::int64_t steps_for_budget(std::int64_t budget) const;

 private:
  ScheduleKind kind_;
  double rate_;
  std::optional<std::int64_t> cap_;
};

BatchSchedule geometric_schedule(double rho,
                                 std::optional<std::int64_t> cap = std::nullopt);
BatchSchedule polynomial_schedule(double v,
                                  std::optional<std::int64_t> cap = std::nullopt);

// Schedule decay matched to each method's mean-square contraction factor:
// vr_sgd ((kappa-1)/(kappa+1))^2 -> (kappa/(kappa+1))^2,
// vr_accelerated 1 - 1/(2 sqrt(kappa)),
// vr_heavy_ball (1 - 1/(sqrt(kappa)+1))^2.
// baseline_sgd takes no batch schedule and is rejected.
double default_rho(AlgorithmKind kind, double eta, double lip);

}  // namespace vrclt
