#include "vrclt/schedules.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "vrclt/errors.hpp"

namespace vrclt {

namespace {

// Largest batch size or cumulative spend we represent; beyond this the
// schedule is declared overflowed rather than silently saturated.
constexpr std::int64_t kMaxCount = std::int64_t{1} << 62;

// rho^(k+1) by iterated multiplication. Relative error is at most about
// (k+1) ulps in long double, far below one part in 2^62 for any horizon
// that survives the overflow guard.
long double geometric_power(double rho, std::int64_t k) {
  long double p = 1.0L;
  for (std::int64_t i = 0; i <= k; ++i) {
    p *= static_cast<long double>(rho);
    if (p < 0x1.0p-70L / static_cast<long double>(kMaxCount)) {
      throw ScheduleOverflow("geometric batch size exceeds 2^62 at step " +
                             std::to_string(k));
    }
  }
  return p;
}

// Exact (k+1)^v for integral v via 128-bit repeated multiplication.
// Returns false when the result would exceed kMaxCount.
bool integral_power(std::int64_t base, std::int64_t exponent,
                    std::int64_t* out) {
  unsigned __int128 acc = 1;
  for (std::int64_t i = 0; i < exponent; ++i) {
    acc *= static_cast<unsigned __int128>(base);
    if (acc > static_cast<unsigned __int128>(kMaxCount)) return false;
  }
  *out = static_cast<std::int64_t>(acc);
  return true;
}

}  // namespace

BatchSchedule::BatchSchedule(ScheduleKind kind, double rate,
                             std::optional<std::int64_t> cap)
    : kind_(kind), rate_(rate), cap_(cap) {
  if (!std::isfinite(rate)) throw ConfigError("schedule rate must be finite");
  if (kind == ScheduleKind::Geometric && !(rate > 0.0 && rate < 1.0)) {
    throw InadmissibleRho("geometric schedule needs rho in (0,1), got " +
                          std::to_string(rate));
  }
  if (kind == ScheduleKind::Polynomial && !(rate > 0.0)) {
    throw ConfigError("polynomial schedule needs v > 0, got " +
                      std::to_string(rate));
  }
  if (cap && *cap < 1) throw ConfigError("batch cap must be at least 1");
}

std::int64_t BatchSchedule::uncapped_batch_size(std::int64_t k) const {
  if (k < 0) throw ConfigError("batch index must be nonnegative");
  if (kind_ == ScheduleKind::Geometric) {
    const long double p = geometric_power(rate_, k);
    long double inv = 1.0L / p;
    if (inv > static_cast<long double>(kMaxCount)) {
      throw ScheduleOverflow("geometric batch size exceeds 2^62 at step " +
                             std::to_string(k));
    }
    std::int64_t n = static_cast<std::int64_t>(ceill(inv));
    // Correction: N is the exact ceiling iff p*N >= 1 > p*(N-1).
    while (n > 1 && p * static_cast<long double>(n - 1) >= 1.0L) --n;
    while (p * static_cast<long double>(n) < 1.0L) ++n;
    return n;
  }
  const std::int64_t base = k + 1;
  const double v = rate_;
  if (v == std::floor(v) && v <= 62.0) {
    std::int64_t exact = 0;
    if (!integral_power(base, static_cast<std::int64_t>(v), &exact)) {
      throw ScheduleOverflow("polynomial batch size exceeds 2^62 at step " +
                             std::to_string(k));
    }
    return exact;
  }
  const long double t = powl(static_cast<long double>(base),
                             static_cast<long double>(v));
  if (t > static_cast<long double>(kMaxCount)) {
    throw ScheduleOverflow("polynomial batch size exceeds 2^62 at step " +
                           std::to_string(k));
  }
  std::int64_t n = static_cast<std::int64_t>(ceill(t));
  while (n > 1 && static_cast<long double>(n - 1) >= t) --n;
  while (static_cast<long double>(n) < t) ++n;
  return n;
}

std::int64_t BatchSchedule::batch_size(std::int64_t k) const {
  const std::int64_t n = uncapped_batch_size(k);
  if (cap_ && n > *cap_) return *cap_;
  return n;
}

bool BatchSchedule::cap_binds_by(std::int64_t steps) const {
  if (!cap_) return false;
  // Batch sizes are nondecreasing in k, so only the last step can bind first.
  if (steps <= 0) return false;
  return uncapped_batch_size(steps - 1) > *cap_;
}

std::int64_t BatchSchedule::cumulative_oracle_calls(std::int64_t steps) const {
  if (steps < 0) throw ConfigError("step count must be nonnegative");
  unsigned __int128 total = 0;
  for (std::int64_t k = 0; k < steps; ++k) {
    total += static_cast<unsigned __int128>(batch_size(k));
    if (total > static_cast<unsigned __int128>(kMaxCount)) {
      throw ScheduleOverflow("cumulative oracle calls exceed 2^62 by step " +
                             std::to_string(k));
    }
  }
  return static_cast<std::int64_t>(total);
}

std::int64_t BatchSchedule::steps_for_budget(std::int64_t budget) const {
  if (budget < 1) throw ConfigError("oracle budget must be at least 1");
  unsigned __int128 total = 0;
  for (std::int64_t k = 0;; ++k) {
    total += static_cast<unsigned __int128>(batch_size(k));
    if (total >= static_cast<unsigned __int128>(budget)) return k + 1;
    if (k >= (std::int64_t{1} << 31)) {
      throw ScheduleOverflow("budget not reached within 2^31 steps");
    }
  }
}

BatchSchedule geometric_schedule(double rho, std::optional<std::int64_t> cap) {
  return BatchSchedule(ScheduleKind::Geometric, rho, cap);
}

BatchSchedule polynomial_schedule(double v, std::optional<std::int64_t> cap) {
  return BatchSchedule(ScheduleKind::Polynomial, v, cap);
}

double default_rho(AlgorithmKind kind, double eta, double lip) {
  if (!(eta > 0.0) || !(lip >= eta)) {
    throw ConfigError("need 0 < eta <= lip for default schedule decay");
  }
  const double kappa = lip / eta;
  switch (kind) {
    case AlgorithmKind::VrSgd: {
      const double r = kappa / (kappa + 1.0);
      return r * r;
    }
    case AlgorithmKind::VrAccelerated:
      return 1.0 - 1.0 / (2.0 * std::sqrt(kappa));
    case AlgorithmKind::VrHeavyBall: {
      const double r = 1.0 - 1.0 / (std::sqrt(kappa) + 1.0);
      return r * r;
    }
    case AlgorithmKind::BaselineSgd:
      break;
  }
  throw ConfigError("baseline_sgd uses one sample per step, no batch schedule");
}

}  // namespace vrclt
