#include "vrclt/problems.hpp"

#include <cmath>
#include <utility>

#include "vrclt/errors.hpp"

namespace vrclt {

namespace {

void check_square_symmetric(const Matrix& a, int dim, const char* what) {
  if (a.rows() != dim || a.cols() != dim) {
    throw ConfigError(std::string(what) + " has wrong shape");
  }
  if (!a.is_symmetric(1e-12)) {
    throw ConfigError(std::string(what) + " must be symmetric");
  }
}

std::pair<double, double> extreme_eigenvalues(const Matrix& a,
                                              const char* what) {
  const auto eig = sym_eig(a);
  const double lo = eig.values.back();
  const double hi = eig.values.front();
  if (!(lo > 0.0)) {
    throw NotPositiveDefinite(std::string(what) +
                              " must be positive definite");
  }
  return {lo, hi};
}

}  // namespace

Vector StochasticProblem::batch_gradient(const Vector& x, std::int64_t n,
                                         RngStream& rng) const {
  if (n < 1) throw ConfigError("batch size must be at least 1");
  Vector acc(static_cast<std::size_t>(dim()), 0.0);
  for (std::int64_t i = 0; i < n; ++i) {
    const Vector g = sample_gradient(x, rng);
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += g[j];
  }
  const double inv = 1.0 / static_cast<double>(n);
  for (double& v : acc) v *= inv;
  return acc;
}

QuadraticGaussianProblem::QuadraticGaussianProblem(Matrix hessian,
                                                   Vector x_star,
                                                   Matrix noise_cov)
    : hessian_(std::move(hessian)),
      x_star_(std::move(x_star)),
      noise_cov_(std::move(noise_cov)),
      noise_chol_lower_(1, 1) {
  const int m = static_cast<int>(x_star_.size());
  if (m < 1) throw ConfigError("problem dimension must be at least 1");
  check_square_symmetric(hessian_, m, "hessian");
  check_square_symmetric(noise_cov_, m, "noise covariance");
  const auto [lo, hi] = extreme_eigenvalues(hessian_, "hessian");
  eta_ = lo;
  lip_ = hi;
  // A zero covariance means a noise-free oracle; normals are still drawn so
  // the stream advances identically to the noisy case.
  noise_chol_lower_ = noise_cov_.max_abs() == 0.0 ? Matrix(m, m)
                                                  : cholesky(noise_cov_).lower;
}

double QuadraticGaussianProblem::f_value(const Vector& x) const {
  const Vector d = vec_sub(x, x_star_);
  return 0.5 * vec_dot(d, hessian_ * d);
}

Vector QuadraticGaussianProblem::exact_gradient(const Vector& x) const {
  return hessian_ * vec_sub(x, x_star_);
}

Vector QuadraticGaussianProblem::sample_gradient(const Vector& x,
                                                 RngStream& rng) const {
  return batch_gradient(x, 1, rng);
}

Vector QuadraticGaussianProblem::batch_gradient(const Vector& x,
                                                std::int64_t n,
                                                RngStream& rng) const {
  if (n < 1) throw ConfigError("batch size must be at least 1");
  Vector g = exact_gradient(x);
  Vector z(static_cast<std::size_t>(dim()));
  rng.fill_normal(z);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  // g += L z / sqrt(n): the mean of n iid N(0, S0) draws is N(0, S0 / n).
  const int m = dim();
  for (int i = 0; i < m; ++i) {
    double acc = 0.0;
    for (int j = 0; j <= i; ++j) {
      acc += noise_chol_lower_(i, j) * z[static_cast<std::size_t>(j)];
    }
    g[static_cast<std::size_t>(i)] += scale * acc;
  }
  return g;
}

LinearRegressionProblem::LinearRegressionProblem(Matrix feature_cov,
                                                 Vector x_star,
                                                 double noise_sigma)
    : feature_cov_(std::move(feature_cov)),
      feature_chol_lower_(1, 1),
      hessian_(1, 1),
      x_star_(std::move(x_star)),
      noise_sigma_(noise_sigma) {
  const int m = static_cast<int>(x_star_.size());
  if (m < 1) throw ConfigError("problem dimension must be at least 1");
  check_square_symmetric(feature_cov_, m, "feature covariance");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw ConfigError("observation noise sigma must be finite and >= 0");
  }
  const auto [lo, hi] = extreme_eigenvalues(feature_cov_, "feature covariance");
  eta_ = 2.0 * lo;
  lip_ = 2.0 * hi;
  feature_chol_lower_ = cholesky(feature_cov_).lower;
  hessian_ = feature_cov_.scaled(2.0);
}

double LinearRegressionProblem::f_value(const Vector& x) const {
  const Vector d = vec_sub(x, x_star_);
  return vec_dot(d, feature_cov_ * d) + noise_sigma_ * noise_sigma_;
}

Vector LinearRegressionProblem::exact_gradient(const Vector& x) const {
  return hessian_ * vec_sub(x, x_star_);
}

Vector LinearRegressionProblem::sample_gradient(const Vector& x,
                                                RngStream& rng) const {
  const int m = dim();
  Vector z(static_cast<std::size_t>(m));
  rng.fill_normal(z);
  Vector u(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < m; ++i) {
    double acc = 0.0;
    for (int j = 0; j <= i; ++j) {
      acc += feature_chol_lower_(i, j) * z[static_cast<std::size_t>(j)];
    }
    u[static_cast<std::size_t>(i)] = acc;
  }
  const double meas_noise = noise_sigma_ * rng.next_normal();
  // residual = u'x - d for d = u'x* + noise.
  const double residual = vec_dot(u, vec_sub(x, x_star_)) - meas_noise;
  return vec_scale(u, 2.0 * residual);
}

Matrix LinearRegressionProblem::noise_covariance_at(const Vector& x) const {
  const Vector delta = vec_sub(x, x_star_);
  const Vector rd = feature_cov_ * delta;
  const double quad = vec_dot(delta, rd);
  Matrix cov = Matrix::outer(rd, rd);
  cov = cov + feature_cov_.scaled(quad + noise_sigma_ * noise_sigma_);
  return cov.scaled(4.0);
}

Matrix spd_from_spectrum(const Vector& eigenvalues, std::uint64_t seed) {
  const int m = static_cast<int>(eigenvalues.size());
  if (m < 1) throw ConfigError("spectrum must be nonempty");
  for (double v : eigenvalues) {
    if (!(v > 0.0)) throw NotPositiveDefinite("spectrum must be positive");
  }
  RngStream rng(seed, 0);
  Matrix q(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) q(i, j) = rng.next_normal();
  }
  // Modified Gram-Schmidt on columns, repeated once for orthogonality at
  // working precision. A zero pivot has probability zero under the Gaussian
  // draw; fail loudly rather than fix up silently.
  for (int pass = 0; pass < 2; ++pass) {
    for (int j = 0; j < m; ++j) {
      for (int p = 0; p < j; ++p) {
        double dot = 0.0;
        for (int i = 0; i < m; ++i) dot += q(i, p) * q(i, j);
        for (int i = 0; i < m; ++i) q(i, j) -= dot * q(i, p);
      }
      double norm = 0.0;
      for (int i = 0; i < m; ++i) norm += q(i, j) * q(i, j);
      norm = std::sqrt(norm);
      if (!(norm > 1e-12)) {
        throw NoConvergence("orthogonalization pivot vanished");
      }
      for (int i = 0; i < m; ++i) q(i, j) /= norm;
    }
  }
  Matrix a(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) {
      double acc = 0.0;
      for (int p = 0; p < m; ++p) {
        acc += q(i, p) * eigenvalues[static_cast<std::size_t>(p)] * q(j, p);
      }
      a(i, j) = acc;
      a(j, i) = acc;
    }
  }
  return a;
}

Vector linspace_spectrum(double lo, double hi, int m) {
  if (m < 1) throw ConfigError("spectrum size must be at least 1");
  if (!(lo > 0.0) || !(hi >= lo)) {
    throw ConfigError("need 0 < lo <= hi for a spectrum");
  }
  Vector out(static_cast<std::size_t>(m));
  if (m == 1) {
    out[0] = lo;
    return out;
  }
  const double step = (hi - lo) / static_cast<double>(m - 1);
  for (int i = 0; i < m; ++i) {
    out[static_cast<std::size_t>(i)] = lo + step * static_cast<double>(i);
  }
  return out;
}

}  // namespace vrclt
