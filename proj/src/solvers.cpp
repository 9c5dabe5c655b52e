#include "vrclt/solvers.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "vrclt/errors.hpp"
#include "vrclt/matrix.hpp"

namespace vrclt {

std::string to_string(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::VrSgd: return "vr_sgd";
    case AlgorithmKind::VrAccelerated: return "vr_accelerated";
    case AlgorithmKind::VrHeavyBall: return "vr_heavy_ball";
    case AlgorithmKind::BaselineSgd: return "baseline_sgd";
  }
  throw ConfigError("unknown algorithm kind");
}

AlgorithmKind algorithm_kind_from_string(const std::string& name) {
  if (name == "vr_sgd") return AlgorithmKind::VrSgd;
  if (name == "vr_accelerated") return AlgorithmKind::VrAccelerated;
  if (name == "vr_heavy_ball") return AlgorithmKind::VrHeavyBall;
  if (name == "baseline_sgd") return AlgorithmKind::BaselineSgd;
  throw ConfigError("unknown algorithm '" + name +
                    "' (expected vr_sgd, vr_accelerated, vr_heavy_ball, or "
                    "baseline_sgd)");
}

Hyperparameters derive_hyperparameters(AlgorithmKind kind, double eta,
                                       double lip, double alpha) {
  if (!(eta > 0.0) || !(lip >= eta)) {
    throw ConfigError("need 0 < eta <= lip");
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw InadmissibleAlpha("step size must be finite and positive");
  }
  Hyperparameters h;
  h.kind = kind;
  h.alpha = alpha;
  switch (kind) {
    case AlgorithmKind::VrSgd: {
      const double limit = 2.0 / (eta + lip);
      if (alpha > limit * (1.0 + 1e-12)) {
        throw InadmissibleAlpha("vr_sgd needs alpha <= 2/(eta+lip) = " +
                                std::to_string(limit));
      }
      h.contraction = 1.0 - 2.0 * alpha * eta * lip / (eta + lip);
      break;
    }
    case AlgorithmKind::VrAccelerated: {
      const double limit = 1.0 / lip;
      if (alpha > limit * (1.0 + 1e-12)) {
        throw InadmissibleAlpha("vr_accelerated needs alpha <= 1/lip = " +
                                std::to_string(limit));
      }
      h.gamma = std::sqrt(alpha * eta);
      h.beta = (1.0 - h.gamma) / (1.0 + h.gamma);
      h.contraction = 1.0 - h.gamma;
      break;
    }
    case AlgorithmKind::VrHeavyBall: {
      const double limit = 4.0 / lip;
      if (alpha >= limit) {
        throw InadmissibleAlpha("vr_heavy_ball needs alpha < 4/lip = " +
                                std::to_string(limit));
      }
      const double a = 1.0 - std::sqrt(alpha * eta);
      const double b = 1.0 - std::sqrt(alpha * lip);
      h.beta = std::max(a * a, b * b);
      h.contraction = h.beta;
      break;
    }
    case AlgorithmKind::BaselineSgd:
      throw ConfigError("baseline_sgd has no fixed step hyperparameters");
  }
  // Guard against contraction rounding to exactly 1 at extreme conditioning.
  if (!(h.contraction >= 0.0 && h.contraction < 1.0)) {
    throw InadmissibleAlpha("step size gives no mean-square contraction");
  }
  return h;
}

Hyperparameters default_hyperparameters(AlgorithmKind kind, double eta,
                                        double lip) {
  if (!(eta > 0.0) || !(lip >= eta)) {
    throw ConfigError("need 0 < eta <= lip");
  }
  double alpha = 0.0;
  switch (kind) {
    case AlgorithmKind::VrSgd:
      alpha = 2.0 / (eta + lip);
      break;
    case AlgorithmKind::VrAccelerated:
      alpha = 1.0 / lip;
      break;
    case AlgorithmKind::VrHeavyBall: {
      const double s = std::sqrt(eta) + std::sqrt(lip);
      alpha = 4.0 / (s * s);
      break;
    }
    case AlgorithmKind::BaselineSgd:
      throw ConfigError("baseline_sgd has no fixed step hyperparameters");
  }
  return derive_hyperparameters(kind, eta, lip, alpha);
}

namespace {

// Streams states into Trajectory::states: all of them (store_all) or the
// ones named in record_at (sorted, duplicates allowed).
class Recorder {
 public:
  Recorder(std::vector<Vector>* states, bool store_all,
           const std::vector<std::int64_t>* record_at, std::int64_t steps)
      : states_(states), store_all_(store_all), record_at_(record_at) {
    if (store_all_ && record_at_ != nullptr) {
      throw ConfigError("store_path and record_at are mutually exclusive");
    }
    if (record_at_ != nullptr) {
      std::int64_t prev = 0;
      for (std::int64_t k : *record_at_) {
        if (k < prev || k > steps) {
          throw ConfigError("record indices must be sorted and within range");
        }
        prev = k;
      }
    }
  }

  void observe(std::int64_t k, const Vector& state) {
    if (store_all_) {
      states_->push_back(state);
      return;
    }
    if (record_at_ == nullptr) return;
    while (pos_ < record_at_->size() &&
           (*record_at_)[pos_] == k) {
      states_->push_back(state);
      ++pos_;
    }
  }

 private:
  std::vector<Vector>* states_;
  bool store_all_;
  const std::vector<std::int64_t>* record_at_;
  std::size_t pos_ = 0;
};

Trajectory run_baseline(const StochasticProblem& problem,
                        const SolverConfig& config, const Vector& x0,
                        std::int64_t steps, RngStream& rng, bool store_path,
                        const std::vector<std::int64_t>* record_at) {
  if (!(config.baseline_c > 0.0) || !std::isfinite(config.baseline_c)) {
    throw ConfigError("baseline_sgd needs c > 0");
  }
  Matrix h_inv;
  if (config.baseline_matrix_step) {
    const auto* quad = dynamic_cast<const QuadraticGaussianProblem*>(&problem);
    if (quad == nullptr) {
      throw MatrixStepUnavailable(
          "hessian-inverse steps need a quadratic problem with a constant "
          "hessian");
    }
    const int m = problem.dim();
    const CholeskyFactor chol = cholesky(quad->hessian());
    h_inv = Matrix(m, m);
    Vector e(static_cast<std::size_t>(m), 0.0);
    for (int j = 0; j < m; ++j) {
      e[static_cast<std::size_t>(j)] = 1.0;
      const Vector col = chol.solve(e);
      e[static_cast<std::size_t>(j)] = 0.0;
      for (int i = 0; i < m; ++i) h_inv(i, j) = col[static_cast<std::size_t>(i)];
    }
  }

  Trajectory traj;
  traj.kind = AlgorithmKind::BaselineSgd;
  traj.steps = steps;
  Recorder recorder(&traj.states, store_path, record_at, steps);
  Vector x = x0;
  Vector prev = x0;
  recorder.observe(0, x);
  for (std::int64_t k = 0; k < steps; ++k) {
    const Vector g = problem.sample_gradient(x, rng);
    prev = x;
    const double decay = 1.0 / static_cast<double>(k + 1);
    if (config.baseline_matrix_step) {
      const Vector step = h_inv * g;
      x = vec_sub(x, vec_scale(step, decay));
    } else {
      x = vec_sub(x, vec_scale(g, config.baseline_c * decay));
    }
    recorder.observe(k + 1, x);
  }
  traj.oracle_calls = steps;
  traj.final_state = std::move(x);
  traj.previous_state = std::move(prev);
  return traj;
}

}  // namespace

Trajectory run_solver(const StochasticProblem& problem,
                      const SolverConfig& config, const BatchSchedule* schedule,
                      const Vector& x0, std::int64_t steps, RngStream& rng,
                      bool store_path,
                      const std::vector<std::int64_t>* record_at) {
  if (static_cast<int>(x0.size()) != problem.dim()) {
    throw ConfigError("start point has wrong dimension");
  }
  if (steps < 0) throw ConfigError("step count must be nonnegative");

  if (config.kind == AlgorithmKind::BaselineSgd) {
    if (schedule != nullptr) {
      throw ConfigError("baseline_sgd draws one sample per step; no schedule");
    }
    return run_baseline(problem, config, x0, steps, rng, store_path,
                        record_at);
  }
  if (schedule == nullptr) {
    throw ConfigError("variance-reduced methods need a batch schedule");
  }

  const double alpha =
      config.alpha > 0.0
          ? config.alpha
          : default_hyperparameters(config.kind, problem.eta(), problem.lip())
                .alpha;
  const Hyperparameters hyper =
      derive_hyperparameters(config.kind, problem.eta(), problem.lip(), alpha);
  if (config.beta && std::abs(*config.beta - hyper.beta) > 1e-9) {
    throw ConfigError("beta is derived from alpha; expected " +
                      std::to_string(hyper.beta));
  }

  Trajectory traj;
  traj.kind = config.kind;
  traj.hyper = hyper;
  traj.steps = steps;
  Recorder recorder(&traj.states, store_path, record_at, steps);

  // state = x_k for vr_sgd and vr_heavy_ball, y_k for vr_accelerated.
  Vector state = x0;
  Vector prev_state = x0;  // x_{k-1} (heavy ball) or y_{k-1} (accelerated)
  Vector x = x0;           // gradient query point (accelerated only)
  recorder.observe(0, state);

  std::int64_t oracle_calls = 0;
  for (std::int64_t k = 0; k < steps; ++k) {
    const std::int64_t n = schedule->batch_size(k);
    oracle_calls += n;
    switch (config.kind) {
      case AlgorithmKind::VrSgd: {
        const Vector g = problem.batch_gradient(state, n, rng);
        prev_state = state;
        state = vec_sub(state, vec_scale(g, hyper.alpha));
        break;
      }
      case AlgorithmKind::VrAccelerated: {
        const Vector g = problem.batch_gradient(x, n, rng);
        const Vector y_next = vec_sub(x, vec_scale(g, hyper.alpha));
        // x_{k+1} = y_{k+1} + beta (y_{k+1} - y_k)
        x = vec_add(y_next, vec_scale(vec_sub(y_next, state), hyper.beta));
        prev_state = state;
        state = y_next;
        break;
      }
      case AlgorithmKind::VrHeavyBall: {
        const Vector g = problem.batch_gradient(state, n, rng);
        Vector next = vec_sub(state, vec_scale(g, hyper.alpha));
        next = vec_add(next, vec_scale(vec_sub(state, prev_state), hyper.beta));
        prev_state = state;
        state = std::move(next);
        break;
      }
      case AlgorithmKind::BaselineSgd:
        break;  // handled above
    }
    recorder.observe(k + 1, state);
  }
  traj.oracle_calls = oracle_calls;
  traj.final_state = std::move(state);
  traj.previous_state = std::move(prev_state);
  return traj;
}

}  // namespace vrclt
