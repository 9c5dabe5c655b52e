#include "vrclt/theory.hpp"

#include <cmath>
#include <string>

#include "vrclt/errors.hpp"
#include "vrclt/solvers.hpp"

namespace vrclt {

namespace {

void check_spd_input(const Matrix& hess) {
  if (hess.rows() != hess.cols() || hess.rows() < 1) {
    throw ConfigError("hessian must be square");
  }
  if (!hess.is_symmetric(1e-10)) {
    throw ConfigError("hessian must be symmetric");
  }
}

struct Extremes {
  double eta;
  double lip;
};

Extremes spectrum_extremes(const Matrix& hess) {
  check_spd_input(hess);
  const auto eig = sym_eig(hess);
  const double eta = eig.values.back();
  const double lip = eig.values.front();
  if (!(eta > 0.0)) {
    throw NotPositiveDefinite("hessian must be positive definite");
  }
  return {eta, lip};
}

double contraction_q(double alpha, double eta, double lip) {
  // The condition-number form returns exactly 0 at eta = lip under the
  // default step, where the generic form leaves rounding residue.
  if (alpha == 2.0 / (eta + lip)) {
    const double kappa = lip / eta;
    return 1.0 - 4.0 * kappa / ((kappa + 1.0) * (kappa + 1.0));
  }
  return 1.0 - 2.0 * alpha * eta * lip / (eta + lip);
}

// Mean-square contraction per step is tiny (kappa = 1 edge cases): the
// assembled constants divide by ln(1/contraction) terms that blow up, so
// fall back to the unrolled one-step recursion, which telescopes to
// c^k e0_sq + a2nu2 sum_j c^j / N_{k-1-j} <= c^k e0_sq + a2nu2 (k^{-v} + c/(1-c)).
constexpr double kTinyContraction = 1e-14;

double polynomial_tail(double contraction, std::int64_t k, double v) {
  return std::pow(static_cast<double>(k), -v) +
         contraction / (1.0 - contraction);
}

}  // namespace

double polynomial_envelope_constant(double q, double v) {
  if (!(q >= 0.0 && q < 1.0)) {
    throw ConfigError("envelope constant needs q in [0,1)");
  }
  if (!(v > 0.0)) throw ConfigError("envelope constant needs v > 0");
  if (q == 0.0) return 0.0;
  return std::exp(-v) * std::pow(v / std::log(1.0 / q), v);
}

RateConstants rate_constants(AlgorithmKind kind, double alpha, double eta,
                             double lip, std::optional<double> v) {
  // Validates admissibility for the requested method.
  const Hyperparameters h = derive_hyperparameters(kind, eta, lip, alpha);
  RateConstants rc;
  rc.q = contraction_q(alpha, eta, lip);
  rc.gamma = std::sqrt(alpha * eta);
  {
    const double a = 1.0 - std::sqrt(alpha * eta);
    const double b = 1.0 - std::sqrt(alpha * lip);
    rc.beta_hb = std::max(a * a, b * b);
  }
  rc.kappa = lip / eta;
  if (v) rc.c_qv = polynomial_envelope_constant(rc.q, *v);
  (void)h;
  return rc;
}

double mse_upper_bound(AlgorithmKind kind, const BatchSchedule& schedule,
                       std::int64_t k, double eta, double lip, double alpha,
                       double nu_sq, double e0_sq) {
  if (k < 0) throw ConfigError("step index must be nonnegative");
  if (!(nu_sq >= 0.0) || !(e0_sq >= 0.0)) {
    throw ConfigError("nu_sq and e0_sq must be nonnegative");
  }
  const Hyperparameters h = derive_hyperparameters(kind, eta, lip, alpha);
  const double q = contraction_q(alpha, eta, lip);
  const double a2nu2 = alpha * alpha * nu_sq;
  const double kd = static_cast<double>(k);

  if (schedule.kind() == ScheduleKind::Geometric) {
    const double rho = schedule.rate();
    if (!(rho > h.contraction)) {
      throw InadmissibleRho("schedule decay rho = " + std::to_string(rho) +
                            " must exceed the contraction factor " +
                            std::to_string(h.contraction));
    }
    switch (kind) {
      case AlgorithmKind::VrSgd:
        return std::pow(rho, kd) * (e0_sq + a2nu2 / (1.0 - q / rho));
      case AlgorithmKind::VrAccelerated: {
        const double gamma = h.gamma;
        const double beta = h.beta;
        const double gap_const =
            0.5 * (eta + lip) * e0_sq +
            rho * nu_sq * (alpha + (1.0 - gamma) * gamma / (2.0 * eta)) /
                (rho - (1.0 - gamma));
        const double c = (2.0 / eta) * gap_const;
        const double lift =
            2.0 * (1.0 + beta) * (1.0 + beta) + 2.0 * beta * beta / rho;
        return c * lift * std::pow(rho, kd);
      }
      case AlgorithmKind::VrHeavyBall: {
        const double beta = h.beta;
        return (2.0 * e0_sq + a2nu2 / (1.0 - beta / rho)) * std::pow(rho, kd);
      }
      case AlgorithmKind::BaselineSgd:
        break;
    }
    throw ConfigError("no mse bound for baseline_sgd");
  }

  const double v = schedule.rate();
  switch (kind) {
    case AlgorithmKind::VrSgd: {
      if (k == 0) return e0_sq;
      if (h.contraction < kTinyContraction) {
        return std::pow(q, kd) * e0_sq + a2nu2 * polynomial_tail(q, k, v);
      }
      const double cqv = polynomial_envelope_constant(q, v);
      const double constant =
          cqv * e0_sq +
          a2nu2 * cqv * (std::exp(2.0 * v) / q - 1.0) / (1.0 - q) +
          2.0 * a2nu2 / (q * std::log(1.0 / q));
      return constant * std::pow(kd, -v);
    }
    case AlgorithmKind::VrAccelerated: {
      if (k == 0) return e0_sq;
      const double gamma = h.gamma;
      const double beta = h.beta;
      const double noise_mult = alpha + (1.0 - gamma) * gamma / (2.0 * eta);
      if (h.contraction < kTinyContraction) {
        const double om = 1.0 - gamma;
        auto gap = [&](std::int64_t j) {
          double g = std::pow(om, static_cast<double>(j)) * 0.5 * (eta + lip) *
                     e0_sq;
          if (j >= 1) {
            g += nu_sq * noise_mult *
                 (std::pow(static_cast<double>(j), -v) + om / gamma);
          }
          return g;
        };
        return (2.0 / eta) * (2.0 * (1.0 + beta) * (1.0 + beta) * gap(k) +
                              2.0 * beta * beta * gap(k - 1));
      }
      const double om = 1.0 - gamma;
      const double c_omv = polynomial_envelope_constant(om, v);
      const double gap_const =
          c_omv * 0.5 * (eta + lip) * e0_sq +
          nu_sq * noise_mult *
              (c_omv * (std::exp(2.0 * v) / om - 1.0) / gamma +
               2.0 / (om * std::log(1.0 / om)));
      if (k == 1) {
        return 2.0 * (1.0 + beta) * (1.0 + beta) * (2.0 / eta) * gap_const +
               2.0 * beta * beta * e0_sq;
      }
      const double lift = 2.0 * (1.0 + beta) * (1.0 + beta) +
                          2.0 * beta * beta * std::pow(2.0, v);
      return (2.0 / eta) * gap_const * lift * std::pow(kd, -v);
    }
    case AlgorithmKind::VrHeavyBall: {
      if (k == 0) return 2.0 * e0_sq;
      const double beta = h.beta;
      if (h.contraction < kTinyContraction) {
        return std::pow(beta, kd) * 2.0 * e0_sq +
               a2nu2 * polynomial_tail(beta, k, v);
      }
      const double c_bv = polynomial_envelope_constant(beta, v);
      const double constant =
          2.0 * c_bv * e0_sq +
          a2nu2 * (c_bv * (std::exp(2.0 * v) / beta - 1.0) / (1.0 - beta) +
                   2.0 / (beta * std::log(1.0 / beta)));
      return constant * std::pow(kd + 1.0, -v);
    }
    case AlgorithmKind::BaselineSgd:
      break;
  }
  throw ConfigError("no mse bound for baseline_sgd");
}

CompanionMatrix companion_matrix(CompanionLabel label, double alpha,
                                 double beta, double rho, const Matrix& hess) {
  const auto [eta, lip] = spectrum_extremes(hess);
  if (!(alpha > 0.0)) throw InadmissibleAlpha("step size must be positive");
  const int m = hess.rows();
  const bool rho_scaled = label == CompanionLabel::P1 ||
                          label == CompanionLabel::P2 ||
                          label == CompanionLabel::P3;
  if (rho_scaled && !(rho > 0.0 && rho < 1.0)) {
    throw InadmissibleRho("rho must lie in (0,1)");
  }
  const double scale = rho_scaled ? 1.0 / std::sqrt(rho) : 1.0;

  CompanionMatrix out;
  out.label = label;

  const Matrix identity = Matrix::identity(m);
  const Matrix b = identity - hess.scaled(alpha);  // I - alpha H

  switch (label) {
    case CompanionLabel::A:
    case CompanionLabel::P1: {
      if (alpha > 2.0 / (eta + lip) * (1.0 + 1e-12)) {
        throw InadmissibleAlpha("needs alpha <= 2/(eta+lip)");
      }
      const double q = contraction_q(alpha, eta, lip);
      out.matrix = b.scaled(scale);
      out.norm_bound = std::sqrt(q) * scale;
      break;
    }
    case CompanionLabel::H2:
    case CompanionLabel::P2: {
      if (alpha > 1.0 / lip * (1.0 + 1e-12)) {
        throw InadmissibleAlpha("needs alpha <= 1/lip");
      }
      const double gamma = std::sqrt(alpha * eta);
      const Matrix zero(m, m);
      out.matrix = Matrix::assemble2x2(b.scaled((1.0 + beta)), b.scaled(-beta),
                                       identity, zero)
                       .scaled(scale);
      out.norm_bound = (1.0 - gamma) * scale;
      break;
    }
    case CompanionLabel::P3Core: {
      if (m != 1) throw ConfigError("core block takes a 1x1 hessian");
      [[fallthrough]];
    }
    case CompanionLabel::P3: {
      if (!(beta >= 0.0 && beta < 1.0)) {
        throw ConfigError("momentum beta must lie in [0,1)");
      }
      const Matrix zero(m, m);
      const Matrix top_left = identity.scaled(1.0 + beta) - hess.scaled(alpha);
      out.matrix = Matrix::assemble2x2(top_left, identity.scaled(-beta),
                                       identity, zero)
                       .scaled(scale);
      out.norm_bound = std::sqrt(beta) * scale;
      break;
    }
  }
  if (rho_scaled && !(out.norm_bound < 1.0)) {
    throw InadmissibleRho("rho-scaled companion has radius bound >= 1");
  }
  return out;
}

LimitCovariance limit_covariance_geometric(const Matrix& p, const Matrix& g,
                                           const Matrix& s0, double tol) {
  const int n = p.rows();
  if (p.cols() != n) throw ConfigError("companion matrix must be square");
  if (g.rows() != n || g.cols() != s0.rows() || s0.rows() != s0.cols()) {
    throw ConfigError("dimension mismatch in covariance limit");
  }
  if (!(tol > 0.0)) throw ConfigError("tolerance must be positive");
  if (spectral_radius(p) >= 1.0 - 1e-10) {
    throw Unstable("companion matrix is not a contraction");
  }

  const Matrix base = g * s0 * g.transpose();
  Matrix sigma = base;
  Matrix power = p;
  std::int64_t terms = 1;
  for (int iter = 0; iter < 100; ++iter) {
    const Matrix add = power * sigma * power.transpose();
    sigma = sigma + add;
    // Symmetrize to stop rounding drift across doublings.
    Matrix sym = sigma;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        sym(i, j) = 0.5 * (sigma(i, j) + sigma(j, i));
      }
    }
    sigma = sym;
    power = power * power;
    terms *= 2;
    if (add.frobenius_norm() < tol) {
      LimitCovariance out;
      out.sigma = sigma;
      out.residual =
          (sigma - base - p * sigma * p.transpose()).frobenius_norm();
      out.terms_used = terms;
      out.construction = LimitCovariance::Construction::Lyapunov;
      return out;
    }
  }
  throw NoConvergence("covariance doubling did not converge");
}

LimitCovariance limit_covariance_polynomial(const Matrix& m, const Matrix& g,
                                            const Matrix& s0, double v,
                                            std::int64_t k_trunc, double tol,
                                            std::int64_t max_terms) {
  const int n = m.rows();
  if (m.cols() != n) throw ConfigError("companion matrix must be square");
  if (g.rows() != n || g.cols() != s0.rows() || s0.rows() != s0.cols()) {
    throw ConfigError("dimension mismatch in covariance limit");
  }
  if (!(v >= 0.0)) throw ConfigError("polynomial rate must be nonnegative");
  if (k_trunc < 1) throw ConfigError("truncation index must be at least 1");
  if (!(tol > 0.0)) throw ConfigError("tolerance must be positive");
  if (spectral_radius(m) >= 1.0 - 1e-10) {
    throw Unstable("companion matrix is not a contraction");
  }

  const Matrix base = g * s0 * g.transpose();
  const Matrix mt = m.transpose();

  // W_k = sum_{t=1}^k t^{-v} M^{k-t} base (M')^{k-t}; F(k) = k^v W_k.
  Matrix w = base;  // k = 1
  std::int64_t k = 1;
  auto advance_to = [&](std::int64_t target) {
    for (std::int64_t t = k + 1; t <= target; ++t) {
      w = m * w * mt + base.scaled(std::pow(static_cast<double>(t), -v));
    }
    k = target;
  };
  auto evaluate = [&]() {
    return w.scaled(std::pow(static_cast<double>(k), v));
  };

  advance_to(k_trunc);
  Matrix prev = evaluate();
  while (true) {
    if (2 * k > max_terms) {
      throw TruncationNotConverged(
          "polynomial covariance limit did not meet tol by k = " +
          std::to_string(k));
    }
    advance_to(2 * k);
    Matrix cur = evaluate();
    const double diff = (cur - prev).frobenius_norm();
    if (diff < tol) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < i; ++j) {
          const double s = 0.5 * (cur(i, j) + cur(j, i));
          cur(i, j) = s;
          cur(j, i) = s;
        }
      }
      LimitCovariance out;
      out.sigma = cur;
      out.residual = diff;
      out.terms_used = k;
      out.construction = LimitCovariance::Construction::TruncatedPolynomial;
      return out;
    }
    prev = cur;
  }
}

LimitCovariance rescaled_error_limit(AlgorithmKind kind,
                                     const BatchSchedule& schedule,
                                     double alpha, const Matrix& hess,
                                     const Matrix& s0, double tol,
                                     std::int64_t k_trunc,
                                     std::int64_t max_terms) {
  const auto [eta, lip] = spectrum_extremes(hess);
  const Hyperparameters h = derive_hyperparameters(kind, eta, lip, alpha);
  const int m = hess.rows();

  const bool geometric = schedule.kind() == ScheduleKind::Geometric;
  const double rate = schedule.rate();

  // The recursion matrix: rho-scaled companion for geometric schedules,
  // the bare companion otherwise. The heavy-ball label set only carries the
  // scaled form, so its unscaled matrix is assembled here.
  Matrix recursion;
  bool stacked = false;
  switch (kind) {
    case AlgorithmKind::VrSgd:
      recursion = companion_matrix(
                      geometric ? CompanionLabel::P1 : CompanionLabel::A,
                      alpha, h.beta, geometric ? rate : 0.5, hess)
                      .matrix;
      break;
    case AlgorithmKind::VrAccelerated:
      recursion = companion_matrix(
                      geometric ? CompanionLabel::P2 : CompanionLabel::H2,
                      alpha, h.beta, geometric ? rate : 0.5, hess)
                      .matrix;
      stacked = true;
      break;
    case AlgorithmKind::VrHeavyBall: {
      if (geometric) {
        recursion =
            companion_matrix(CompanionLabel::P3, alpha, h.beta, rate, hess)
                .matrix;
      } else {
        const Matrix identity = Matrix::identity(m);
        recursion = Matrix::assemble2x2(
            identity.scaled(1.0 + h.beta) - hess.scaled(alpha),
            identity.scaled(-h.beta), identity, Matrix(m, m));
      }
      stacked = true;
      break;
    }
    case AlgorithmKind::BaselineSgd:
    default:
      throw ConfigError("no rescaled error limit for baseline_sgd");
  }

  Matrix g = Matrix::identity(m);
  if (stacked) {
    Matrix tall(2 * m, m);
    for (int i = 0; i < m; ++i) tall(i, i) = 1.0;
    g = tall;
  }

  if (geometric) {
    return limit_covariance_geometric(recursion, g, s0, tol);
  }
  return limit_covariance_polynomial(recursion, g, s0, rate, k_trunc, tol,
                                     max_terms);
}

DeltaMethod delta_method_covariances(const Matrix& hess,
                                     const Matrix& sigma1) {
  if (hess.rows() != hess.cols() || sigma1.rows() != sigma1.cols() ||
      hess.rows() != sigma1.rows()) {
    throw ConfigError("dimension mismatch in delta method");
  }
  DeltaMethod out;
  out.grad_cov = hess * sigma1 * hess;
  out.subopt_mean = 0.5 * (hess * sigma1).trace();
  return out;
}

}  // namespace vrclt
