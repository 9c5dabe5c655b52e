#pragma once

#include <cstdint>
#include <optional>

#include "vrclt/algorithm_kind.hpp"
#include "vrclt/matrix.hpp"
#include "vrclt/schedules.hpp"

namespace vrclt {

// Scalar constants the convergence and limit theory is phrased in.
struct RateConstants {
  double q = 0.0;        // mean-square contraction 1 - 2 alpha eta lip/(eta+lip)
  double gamma = 0.0;    // sqrt(alpha eta)
  double beta_hb = 0.0;  // max(|1-sqrt(alpha eta)|, |1-sqrt(alpha lip)|)^2
  double kappa = 1.0;    // lip/eta
  // Envelope constant c_{q,v} with q^x <= c_{q,v} x^{-v} for all x > 0;
  // populated only when v is supplied.
  std::optional<double> c_qv;
};

// Throws InadmissibleAlpha when alpha is outside the admissible range for
// kind. When alpha is exactly the vr_sgd default 2/(eta+lip), q is evaluated
// in its condition-number form 1 - 4 kappa/(kappa+1)^2 so that eta = lip
// gives exactly 0.
RateConstants rate_constants(AlgorithmKind kind, double alpha, double eta,
                             double lip,
                             std::optional<double> v = std::nullopt);

// e^{-v} (v / ln(1/q))^v, the tightest constant with q^x <= c x^{-v} on
// x > 0. Continuous extension 0 at q = 0. Requires q in [0,1), v > 0.
double polynomial_envelope_constant(double q, double v);

// Upper bound on the mean squared error at step k under the given batch
// schedule, from the start distance e0_sq = ||x0 - x*||^2 and the gradient
// noise second moment nu_sq. The bounded quantity is E||x_k - x*||^2 for
// vr_sgd and vr_accelerated and the stacked E||(x_k, x_{k-1}) - (x*, x*)||^2
// for vr_heavy_ball (which dominates the per-iterate error).
// Geometric schedules require rho strictly above the method's contraction
// factor (InadmissibleRho otherwise).
double mse_upper_bound(AlgorithmKind kind, const BatchSchedule& schedule,
                       std::int64_t k, double eta, double lip, double alpha,
                       double nu_sq, double e0_sq);

// Companion matrices of the error recursions, with B = I - alpha H:
//   A  = B                                   radius bound sqrt(q)
//   P1 = rho^{-1/2} B                        radius bound sqrt(q/rho)
//   H2 = [(1+beta) B, -beta B; I, 0]         radius bound 1 - gamma
//   P2 = rho^{-1/2} H2                       radius bound (1-gamma)/sqrt(rho)
//   H3 = [(1+beta) I - alpha H, -beta I; I, 0]   radius bound sqrt(beta)
//   P3 = rho^{-1/2} H3                       radius bound sqrt(beta/rho)
//   P3Core: the 2x2 block of H3 for a 1x1 H  radius bound sqrt(beta)
// The blocks are non-normal, so the bound holds for the spectral radius,
// not the induced 2-norm.
enum class CompanionLabel { P1, H2, P2, P3Core, P3, A };

struct CompanionMatrix {
  CompanionLabel label = CompanionLabel::A;
  Matrix matrix;
  double norm_bound = 0.0;
};

// beta is ignored for P1/A; rho is ignored for the unscaled labels. Throws
// InadmissibleRho when a rho-scaled matrix would have radius bound >= 1.
CompanionMatrix companion_matrix(CompanionLabel label, double alpha,
                                 double beta, double rho, const Matrix& hess);

struct LimitCovariance {
  enum class Construction { Lyapunov, TruncatedPolynomial };
  Matrix sigma;
  double residual = 0.0;
  std::int64_t terms_used = 0;
  Construction construction = Construction::Lyapunov;
};

// Solves Sigma = G S0 G' + P Sigma P' by the doubling iteration
// S <- S + M S M', M <- M^2, which sums the series sum_t P^t G S0 G' (P')^t
// exactly in log many sweeps. residual is the Lyapunov equation residual.
// Throws Unstable when spectral_radius(P) >= 1 - 1e-10.
LimitCovariance limit_covariance_geometric(const Matrix& p, const Matrix& g,
                                           const Matrix& s0, double tol);

// Evaluates F(k) = sum_{t=1}^k (k/t)^v M^{k-t} G S0 G' (M')^{k-t} at
// k = k_trunc, 2 k_trunc, 4 k_trunc, ... until successive evaluations agree
// within tol in Frobenius norm, reusing the running recursion
// W_{k+1} = M W_k M' + (k+1)^{-v} G S0 G', F(k) = k^v W_k.
// Throws Unstable on a non-contractive M and TruncationNotConverged when the
// cap max_terms is reached first.
LimitCovariance limit_covariance_polynomial(const Matrix& m, const Matrix& g,
                                            const Matrix& s0, double v,
                                            std::int64_t k_trunc, double tol,
                                            std::int64_t max_terms = std::int64_t{1}
                                                                     << 23);

// Limiting covariance of the rescaled terminal error for one method:
// geometric schedules scale the companion by rho^{-1/2} (Lyapunov series),
// polynomial ones use the unscaled companion with (k/t)^v weights. The
// result has dimension m for vr_sgd and 2m (stacked last two iterates) for
// the momentum methods; the observable marginal is the top-left m x m block.
LimitCovariance rescaled_error_limit(AlgorithmKind kind,
                                     const BatchSchedule& schedule,
                                     double alpha, const Matrix& hess,
                                     const Matrix& s0, double tol,
                                     std::int64_t k_trunc = 1024,
                                     std::int64_t max_terms = std::int64_t{1}
                                                              << 23);

// Images of the position CLT under the delta method: the rescaled gradient
// is asymptotically N(0, H Sigma1 H) and the rescaled suboptimality gap
// converges to (1/2) z' H z for z ~ N(0, Sigma1), whose mean is
// (1/2) trace(H Sigma1).
struct DeltaMethod {
  Matrix grad_cov;
  double subopt_mean = 0.0;
};
DeltaMethod delta_method_covariances(const Matrix& hess, const Matrix& sigma1);

}  // namespace vrclt
