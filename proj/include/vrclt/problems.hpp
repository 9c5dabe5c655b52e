#pragma once

#include <cstdint>

#include "vrclt/matrix.hpp"
#include "vrclt/rng.hpp"

namespace vrclt {

// A strongly convex objective with an unbiased stochastic gradient oracle.
// eta and lip are the strong convexity and gradient Lipschitz constants;
// noise_covariance_at(x) is the covariance of sample_gradient(x) - grad f(x).
class StochasticProblem {
 public:
  virtual ~StochasticProblem() = default;

  virtual int dim() const = 0;
  virtual const Vector& x_star() const = 0;
  virtual double eta() const = 0;
  virtual double lip() const = 0;
  double condition_number() const { return lip() / eta(); }

  virtual double f_value(const Vector& x) const = 0;
  virtual double f_min() const = 0;
  virtual Vector exact_gradient(const Vector& x) const = 0;
  virtual Vector sample_gradient(const Vector& x, RngStream& rng) const = 0;
  // Mean of n fresh sample gradients. Overrides may draw the averaged noise
  // directly when its law is known in closed form; n = 1 must consume the
  // stream exactly like sample_gradient.
  virtual Vector batch_gradient(const Vector& x, std::int64_t n,
                                RngStream& rng) const;

  virtual Matrix hessian_at_opt() const = 0;
  virtual Matrix noise_covariance_at(const Vector& x) const = 0;
};

// f(x) = (1/2)(x - x*)' H (x - x*) with additive N(0, S0) gradient noise.
// The noise law does not depend on x, so a batch of n samples averages to a
// single N(0, S0 / n) draw; batch_gradient exploits that.
class QuadraticGaussianProblem final : public StochasticProblem {
 public:
  QuadraticGaussianProblem(Matrix hessian, Vector x_star, Matrix noise_cov);

  int dim() const override { return static_cast<int>(x_star_.size()); }
  const Vector& x_star() const override { return x_star_; }
  double eta() const override { return eta_; }
  double lip() const override { return lip_; }
  double f_value(const Vector& x) const override;
  double f_min() const override { return 0.0; }
  Vector exact_gradient(const Vector& x) const override;
  Vector sample_gradient(const Vector& x, RngStream& rng) const override;
  Vector batch_gradient(const Vector& x, std::int64_t n,
                        RngStream& rng) const override;
  Matrix hessian_at_opt() const override { return hessian_; }
  Matrix noise_covariance_at(const Vector&) const override {
    return noise_cov_;
  }

  const Matrix& hessian() const { return hessian_; }
  const Matrix& noise_cov() const { return noise_cov_; }

 private:
  Matrix hessian_;
  Vector x_star_;
  Matrix noise_cov_;
  Matrix noise_chol_lower_;
  double eta_ = 0.0;
  double lip_ = 0.0;
};

// Streaming least squares: observe (u, d) with u ~ N(0, R_u),
// d = u' x* + noise, noise ~ N(0, sigma^2). The population objective is
// f(x) = E (d - u'x)^2 = (x - x*)' R_u (x - x*) + sigma^2, so the Hessian is
// 2 R_u and the per-sample gradient 2((u'x - d) u) is unbiased for grad f.
class LinearRegressionProblem final : public StochasticProblem {
 public:
  LinearRegressionProblem(Matrix feature_cov, Vector x_star,
                          double noise_sigma);

  int dim() const override { return static_cast<int>(x_star_.size()); }
  const Vector& x_star() const override { return x_star_; }
  double eta() const override { return eta_; }
  double lip() const override { return lip_; }
  double f_value(const Vector& x) const override;
  double f_min() const override { return noise_sigma_ * noise_sigma_; }
  Vector exact_gradient(const Vector& x) const override;
  Vector sample_gradient(const Vector& x, RngStream& rng) const override;
  Matrix hessian_at_opt() const override { return hessian_; }
  // Cov of the gradient noise at x, with delta = x - x*:
  // 4 (R_u delta delta' R_u + (delta' R_u delta) R_u + sigma^2 R_u).
  Matrix noise_covariance_at(const Vector& x) const override;

  const Matrix& feature_cov() const { return feature_cov_; }
  double noise_sigma() const { return noise_sigma_; }

 private:
  Matrix feature_cov_;
  Matrix feature_chol_lower_;
  Matrix hessian_;
  Vector x_star_;
  double noise_sigma_;
  double eta_ = 0.0;
  double lip_ = 0.0;
};

// Q diag(eigenvalues) Q' for a seed-determined random orthogonal Q.
// All eigenvalues must be positive.
Matrix spd_from_spectrum(const Vector& eigenvalues, std::uint64_t seed);

// m values evenly spaced from lo to hi inclusive (all equal when m = 1).
Vector linspace_spectrum(double lo, double hi, int m);

}  // namespace vrclt
