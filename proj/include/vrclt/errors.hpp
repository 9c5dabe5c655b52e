#pragma once

#include <stdexcept>
#include <string>

namespace vrclt {

// Matrix passed to a Cholesky-based routine is not (numerically) SPD.
struct NotPositiveDefinite : std::runtime_error {
  explicit NotPositiveDefinite(const std::string& what) : std::runtime_error(what) {}
};

// An iterative routine hit its iteration cap before meeting tolerance.
struct NoConvergence : std::runtime_error {
  explicit NoConvergence(const std::string& what) : std::runtime_error(what) {}
};

// A batch size or cumulative count does not fit in int64.
struct ScheduleOverflow : std::runtime_error {
  explicit ScheduleOverflow(const std::string& what) : std::runtime_error(what) {}
};

// Step size outside the admissible range of the selected algorithm.
struct InadmissibleAlpha : std::invalid_argument {
  explicit InadmissibleAlpha(const std::string& what) : std::invalid_argument(what) {}
};

// Geometric schedule rate outside (contraction factor, 1).
struct InadmissibleRho : std::invalid_argument {
  explicit InadmissibleRho(const std::string& what) : std::invalid_argument(what) {}
};

// Contraction matrix has spectral radius >= 1; the covariance series diverges.
struct Unstable : std::runtime_error {
  explicit Unstable(const std::string& what) : std::runtime_error(what) {}
};

// Doubling the truncation index did not reach the requested tolerance.
struct TruncationNotConverged : std::runtime_error {
  explicit TruncationNotConverged(const std::string& what) : std::runtime_error(what) {}
};

// Sample covariance of the replicates is numerically singular.
struct SingularCovariance : std::runtime_error {
  explicit SingularCovariance(const std::string& what) : std::runtime_error(what) {}
};

// Confidence-region construction needs n >= m + 1 replicates.
struct TooFewReplicates : std::invalid_argument {
  explicit TooFewReplicates(const std::string& what) : std::invalid_argument(what) {}
};

// Matrix step rule requested for a problem without a closed-form Hessian.
struct MatrixStepUnavailable : std::invalid_argument {
  explicit MatrixStepUnavailable(const std::string& what) : std::invalid_argument(what) {}
};

// Solver or experiment configuration violates a construction invariant.
struct ConfigError : std::invalid_argument {
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace vrclt
