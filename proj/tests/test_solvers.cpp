#include <doctest.h>

#include <cmath>
#include <vector>

#include "vrclt/errors.hpp"
#include "vrclt/problems.hpp"
#include "vrclt/rng.hpp"
#include "vrclt/schedules.hpp"
#include "vrclt/solvers.hpp"

using namespace vrclt;

namespace {

QuadraticGaussianProblem noise_free_identity(int m) {
  return QuadraticGaussianProblem(Matrix::identity(m), Vector(m, 1.0),
                                  Matrix(m, m));
}

}  // namespace

TEST_CASE("default hyperparameters at eta=1, lip=10") {
  const double eta = 1.0, lip = 10.0;
  const auto sgd = default_hyperparameters(AlgorithmKind::VrSgd, eta, lip);
  CHECK(sgd.alpha == doctest::Approx(2.0 / 11.0).epsilon(1e-14));
  CHECK(sgd.beta == 0.0);
  CHECK(sgd.contraction == doctest::Approx(81.0 / 121.0).epsilon(1e-12));

  const auto acc =
      default_hyperparameters(AlgorithmKind::VrAccelerated, eta, lip);
  CHECK(acc.alpha == doctest::Approx(0.1).epsilon(1e-14));
  const double gamma = std::sqrt(0.1);
  CHECK(acc.gamma == doctest::Approx(gamma).epsilon(1e-14));
  CHECK(acc.beta == doctest::Approx((1 - gamma) / (1 + gamma)).epsilon(1e-14));
  CHECK(acc.contraction == doctest::Approx(1 - gamma).epsilon(1e-14));

  const auto hb = default_hyperparameters(AlgorithmKind::VrHeavyBall, eta, lip);
  const double root = std::sqrt(10.0);
  CHECK(hb.alpha == doctest::Approx(4.0 / ((1 + root) * (1 + root)))
                        .epsilon(1e-14));
  const double beta = (root - 1) / (root + 1);
  CHECK(hb.beta == doctest::Approx(beta * beta).epsilon(1e-12));
  CHECK(hb.contraction == doctest::Approx(hb.beta).epsilon(1e-14));

  CHECK_THROWS_AS(default_hyperparameters(AlgorithmKind::BaselineSgd, eta, lip),
                  ConfigError);
}

TEST_CASE("step size admissibility boundaries") {
  const double eta = 1.0, lip = 10.0;
  CHECK_NOTHROW(derive_hyperparameters(AlgorithmKind::VrSgd, eta, lip, 2.0 / 11.0));
  CHECK_THROWS_AS(
      derive_hyperparameters(AlgorithmKind::VrSgd, eta, lip, 2.0 / 11.0 * 1.001),
      InadmissibleAlpha);
  CHECK_THROWS_AS(derive_hyperparameters(AlgorithmKind::VrSgd, eta, lip, 0.0),
                  InadmissibleAlpha);
  CHECK_THROWS_AS(derive_hyperparameters(AlgorithmKind::VrSgd, eta, lip, -0.1),
                  InadmissibleAlpha);

  CHECK_NOTHROW(derive_hyperparameters(AlgorithmKind::VrAccelerated, eta, lip, 0.1));
  CHECK_THROWS_AS(
      derive_hyperparameters(AlgorithmKind::VrAccelerated, eta, lip, 0.1001),
      InadmissibleAlpha);

  // The heavy-ball range is open at 4/lip: beta would reach 1 there.
  CHECK_NOTHROW(derive_hyperparameters(AlgorithmKind::VrHeavyBall, eta, lip, 0.39));
  CHECK_THROWS_AS(
      derive_hyperparameters(AlgorithmKind::VrHeavyBall, eta, lip, 0.4),
      InadmissibleAlpha);
  CHECK_THROWS_AS(
      derive_hyperparameters(AlgorithmKind::VrHeavyBall, eta, lip, 0.41),
      InadmissibleAlpha);

  CHECK_THROWS_AS(derive_hyperparameters(AlgorithmKind::VrSgd, 0.0, lip, 0.1),
                  ConfigError);
  CHECK_THROWS_AS(derive_hyperparameters(AlgorithmKind::VrSgd, 2.0, 1.0, 0.1),
                  ConfigError);
}

TEST_CASE("beta is derived, not free") {
  const auto p = noise_free_identity(2);
  const BatchSchedule sched = geometric_schedule(0.5);
  RngStream rng(1, 0);
  SolverConfig cfg;
  cfg.kind = AlgorithmKind::VrAccelerated;
  cfg.alpha = 1.0;  // kappa = 1: gamma = 1, beta = 0
  cfg.beta = 0.25;
  CHECK_THROWS_AS(run_solver(p, cfg, &sched, Vector{0.0, 0.0}, 3, rng),
                  ConfigError);
  cfg.beta = 0.0;
  CHECK_NOTHROW(run_solver(p, cfg, &sched, Vector{0.0, 0.0}, 3, rng));
}

TEST_CASE("schedule pairing rules") {
  const auto p = noise_free_identity(2);
  const BatchSchedule sched = geometric_schedule(0.5);
  RngStream rng(2, 0);
  SolverConfig vr;
  vr.kind = AlgorithmKind::VrSgd;
  CHECK_THROWS_AS(run_solver(p, vr, nullptr, Vector{0.0, 0.0}, 3, rng),
                  ConfigError);
  SolverConfig base;
  base.kind = AlgorithmKind::BaselineSgd;
  CHECK_THROWS_AS(run_solver(p, base, &sched, Vector{0.0, 0.0}, 3, rng),
                  ConfigError);
  CHECK_NOTHROW(run_solver(p, base, nullptr, Vector{0.0, 0.0}, 3, rng));
}

TEST_CASE("one step reaches the optimum when kappa = 1 and noise is zero") {
  const auto p = noise_free_identity(3);
  const BatchSchedule sched = geometric_schedule(0.5);
  const Vector x0{4.0, -2.0, 0.5};

  for (AlgorithmKind kind : {AlgorithmKind::VrSgd, AlgorithmKind::VrAccelerated,
                             AlgorithmKind::VrHeavyBall}) {
    RngStream rng(3, 0);
    SolverConfig cfg;
    cfg.kind = kind;
    const Trajectory t = run_solver(p, cfg, &sched, x0, 1, rng);
    CHECK(t.final_state == p.x_star());
    CHECK(t.previous_state == x0);
  }

  // Baseline with c = 1 takes the full Newton step at k = 0 since H = I.
  {
    RngStream rng(3, 1);
    SolverConfig cfg;
    cfg.kind = AlgorithmKind::BaselineSgd;
    const Trajectory t = run_solver(p, cfg, nullptr, x0, 1, rng);
    CHECK(t.final_state == p.x_star());
  }

  // The matrix step reaches the optimum for any SPD Hessian.
  {
    const Matrix h = spd_from_spectrum(Vector{1.0, 3.0, 7.0}, 11);
    QuadraticGaussianProblem q(h, Vector{1.0, 2.0, 3.0}, Matrix(3, 3));
    RngStream rng(3, 2);
    SolverConfig cfg;
    cfg.kind = AlgorithmKind::BaselineSgd;
    cfg.baseline_matrix_step = true;
    const Trajectory t = run_solver(q, cfg, nullptr, x0, 1, rng);
    for (int i = 0; i < 3; ++i) {
      CHECK(t.final_state[static_cast<size_t>(i)] ==
            doctest::Approx(q.x_star()[static_cast<size_t>(i)]).epsilon(1e-12));
    }
  }
}

TEST_CASE("matrix step needs a quadratic problem") {
  LinearRegressionProblem p(Matrix::identity(2), Vector{0.0, 0.0}, 1.0);
  RngStream rng(4, 0);
  SolverConfig cfg;
  cfg.kind = AlgorithmKind::BaselineSgd;
  cfg.baseline_matrix_step = true;
  CHECK_THROWS_AS(run_solver(p, cfg, nullptr, Vector{1.0, 1.0}, 2, rng),
                  MatrixStepUnavailable);
}

TEST_CASE("all three methods collapse to the same recursion when beta = 0") {
  // kappa = 1 with alpha = 1 gives beta = 0 for the momentum methods, and the
  // accelerated y-sequence equals the plain iterate sequence. Identical
  // streams then produce bitwise identical paths.
  const Matrix h = Matrix::identity(2);
  QuadraticGaussianProblem p(h, Vector{0.0, 0.0}, Matrix::identity(2));
  const BatchSchedule sched = geometric_schedule(0.5);
  const Vector x0{1.0, -1.0};

  std::vector<std::vector<Vector>> paths;
  for (AlgorithmKind kind : {AlgorithmKind::VrSgd, AlgorithmKind::VrAccelerated,
                             AlgorithmKind::VrHeavyBall}) {
    RngStream rng(5, 9);
    SolverConfig cfg;
    cfg.kind = kind;
    cfg.alpha = 1.0;
    paths.push_back(run_solver(p, cfg, &sched, x0, 6, rng, true).states);
  }
  CHECK(paths[0].size() == 7);
  CHECK(paths[0] == paths[1]);
  CHECK(paths[0] == paths[2]);
}

TEST_CASE("trajectory bookkeeping") {
  const Matrix h = Matrix::diag(Vector{1.0, 10.0});
  QuadraticGaussianProblem p(h, Vector{0.0, 0.0}, Matrix::identity(2));
  const BatchSchedule sched = geometric_schedule(0.5);
  const Vector x0{1.0, 1.0};

  RngStream rng(6, 0);
  SolverConfig cfg;
  cfg.kind = AlgorithmKind::VrSgd;
  const Trajectory full = run_solver(p, cfg, &sched, x0, 5, rng, true);
  CHECK(full.steps == 5);
  // N_k = 2, 4, 8, 16, 32.
  CHECK(full.oracle_calls == 62);
  CHECK(full.states.size() == 6);
  CHECK(full.states.front() == x0);
  CHECK(full.states.back() == full.final_state);
  CHECK(full.states[4] == full.previous_state);
  CHECK(full.hyper.alpha == doctest::Approx(2.0 / 11.0));

  // record_at keeps exactly the requested checkpoints of the same path.
  RngStream rng2(6, 0);
  const std::vector<std::int64_t> marks{0, 3, 5};
  const Trajectory picked = run_solver(p, cfg, &sched, x0, 5, rng2, false, &marks);
  REQUIRE(picked.states.size() == 3);
  CHECK(picked.states[0] == full.states[0]);
  CHECK(picked.states[1] == full.states[3]);
  CHECK(picked.states[2] == full.states[5]);

  RngStream rng3(6, 0);
  const std::vector<std::int64_t> bad{3, 0};
  CHECK_THROWS_AS(run_solver(p, cfg, &sched, x0, 5, rng3, false, &bad),
                  ConfigError);
  CHECK_THROWS_AS(run_solver(p, cfg, &sched, x0, 5, rng3, true, &marks),
                  ConfigError);

  // Zero steps: both endpoints are the start.
  RngStream rng4(6, 0);
  const Trajectory none = run_solver(p, cfg, &sched, x0, 0, rng4);
  CHECK(none.final_state == x0);
  CHECK(none.previous_state == x0);
  CHECK(none.oracle_calls == 0);

  // Baseline draws one sample per step.
  RngStream rng5(6, 1);
  SolverConfig base;
  base.kind = AlgorithmKind::BaselineSgd;
  const Trajectory bt = run_solver(p, base, nullptr, x0, 7, rng5);
  CHECK(bt.oracle_calls == 7);
}

TEST_CASE("noise-free descent is monotone for vr_sgd") {
  const Matrix h = Matrix::diag(Vector{1.0, 10.0});
  QuadraticGaussianProblem p(h, Vector{0.0, 0.0}, Matrix(2, 2));
  const BatchSchedule sched = geometric_schedule(0.5);
  RngStream rng(7, 0);
  SolverConfig cfg;
  cfg.kind = AlgorithmKind::VrSgd;
  const Trajectory t = run_solver(p, cfg, &sched, Vector{1.0, 1.0}, 50, rng, true);
  double prev = vec_norm(t.states[0]);
  for (size_t k = 1; k < t.states.size(); ++k) {
    const double cur = vec_norm(t.states[k]);
    CHECK(cur < prev);
    prev = cur;
  }
  // Both eigenvalues contract by 9/11 per step at the default alpha.
  CHECK(prev == doctest::Approx(std::sqrt(2.0) * std::pow(9.0 / 11.0, 50))
                    .epsilon(1e-9));
}

TEST_CASE("baseline obeys the classical k * mse limit") {
  // Scalar recursion e_{k+1} = (1 - 2/(k+1)) e_k - xi_k/(k+1) with unit noise
  // has k E[e_k^2] -> c^2 S / (2 c h - 1) = 1/3 for h = 2, c = 1, S = 1.
  const Matrix h = Matrix::diag(Vector{2.0});
  QuadraticGaussianProblem p(h, Vector{0.0}, Matrix::identity(1));
  SolverConfig cfg;
  cfg.kind = AlgorithmKind::BaselineSgd;
  const std::int64_t k = 300;
  const int paths = 4000;
  double acc = 0.0;
  for (int i = 0; i < paths; ++i) {
    RngStream rng(8, static_cast<std::uint64_t>(i));
    const Trajectory t = run_solver(p, cfg, nullptr, Vector{1.0}, k, rng);
    acc += t.final_state[0] * t.final_state[0];
  }
  const double scaled = static_cast<double>(k) * acc / paths;
  CHECK(scaled == doctest::Approx(1.0 / 3.0).epsilon(0.25));
}
