#include <random>

#include "doctest.h"
#include "ecoplatoon/qp.hpp"
#include "oracles.hpp"

using namespace ecoplatoon;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

/// Random strictly convex, strictly feasible QP with full-row-rank E.
QpProblem random_qp(std::mt19937_64& rng, int n, int m, int p) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto randn = [&](int r, int c) {
    MatrixXd M(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) M(i, j) = gauss(rng);
    return M;
  };
  QpProblem qp;
  const MatrixXd L = randn(n, n);
  qp.H = L * L.transpose() + 0.5 * MatrixXd::Identity(n, n);
  qp.b = randn(n, 1);
  const VectorXd z_feas = randn(n, 1);
  qp.G = randn(m, n);
  qp.h = qp.G * z_feas;
  for (int i = 0; i < m; ++i) qp.h(i) += 0.1 + std::abs(gauss(rng));
  if (p > 0) {
    MatrixXd E;
    do {
      E = randn(p, n);
    } while (Eigen::FullPivLU<MatrixXd>(E).rank() < p);
    qp.E = E;
    qp.d = E * z_feas;
  } else {
    qp.E.resize(0, n);
    qp.d.resize(0);
  }
  return qp;
}

}  // namespace

TEST_CASE("kkt residual definition") {
  SUBCASE("zero at an exact KKT point of a scalar QP") {
    // min z^2 s.t. z >= 1, i.e. -z <= -1: optimum z=1, eta=2, pi=0+.
    QpProblem qp;
    qp.H = MatrixXd::Constant(1, 1, 2.0);
    qp.b = VectorXd::Zero(1);
    qp.G = MatrixXd::Constant(1, 1, -1.0);
    qp.h = VectorXd::Constant(1, -1.0);
    qp.E.resize(0, 1);
    qp.d.resize(0);
    SolverState s;
    s.z = VectorXd::Constant(1, 1.0);
    s.lambda.resize(0);
    s.eta = VectorXd::Constant(1, 2.0);
    s.pi = VectorXd::Constant(1, 1e-14);
    const VectorXd F = kkt_residual(qp, s, 1e4, 0.0);
    CHECK(F(0) == doctest::Approx(0.0).epsilon(1e-12));  // stationarity 2z - eta
    CHECK(F(1) == doctest::Approx(0.0).epsilon(1e-10));  // primal -z + 1 + pi
    CHECK(F(2) == doctest::Approx(0.0).epsilon(1e-10));  // complementarity
  }
  SUBCASE("stack length is n + p + 2m") {
    QpProblem qp;
    const int n = 16, m = 32, p = 8;  // the long-term shape at K=4
    qp.H = MatrixXd::Identity(n, n);
    qp.b = VectorXd::Zero(n);
    qp.G = MatrixXd::Ones(m, n);
    qp.h = VectorXd::Ones(m);
    qp.E = MatrixXd::Zero(p, n);
    qp.E.leftCols(p).setIdentity();
    qp.d = VectorXd::Zero(p);
    CHECK(qp.kkt_dimension() == 88);  // 22K at K=4
    SolverState s = initial_state(qp, VectorXd::Zero(n));
    CHECK(kkt_residual(qp, s, 1e4).size() == 88);
  }
  SUBCASE("state dimension mismatch is a contract error") {
    QpProblem qp;
    qp.H = MatrixXd::Identity(2, 2);
    qp.b = VectorXd::Zero(2);
    qp.G.resize(0, 2);
    qp.h.resize(0);
    qp.E.resize(0, 2);
    qp.d.resize(0);
    SolverState s;
    s.z = VectorXd::Zero(3);
    CHECK_THROWS_AS(kkt_residual(qp, s, 1e4), std::invalid_argument);
  }
}

TEST_CASE("newton direction solves the full linear system") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    QpProblem qp = random_qp(rng, 6, 4, 2);
    SolverState s = initial_state(qp, VectorXd::Zero(6));
    const double xi = 1e4;
    const VectorXd F = kkt_residual(qp, s, xi, 0.1);
    const NewtonDirection dir = newton_direction(qp, s, F, xi);
    REQUIRE(dir.ok);

    // Assemble the Jacobian explicitly and verify J * delta + F = 0.
    const int n = 6, m = 4, p = 2;
    MatrixXd Hbar = qp.H + (xi / 2.0) * qp.E.transpose() * qp.E;
    MatrixXd J = MatrixXd::Zero(n + p + 2 * m, n + p + 2 * m);
    J.block(0, 0, n, n) = Hbar;
    J.block(0, n, n, p) = qp.E.transpose();
    J.block(0, n + p, n, m) = qp.G.transpose();
    J.block(n, 0, p, n) = qp.E;
    J.block(n + p, 0, m, n) = qp.G;
    J.block(n + p, n + p + m, m, m).setIdentity();
    J.block(n + p + m, n + p, m, m) = s.pi.asDiagonal();
    J.block(n + p + m, n + p + m, m, m) = s.eta.asDiagonal();
    VectorXd delta(n + p + 2 * m);
    delta << dir.dz, dir.dlambda, dir.deta, dir.dpi;
    const double scale = std::max(1.0, F.lpNorm<Eigen::Infinity>());
    CHECK((J * delta + F).lpNorm<Eigen::Infinity>() <= 1e-8 * scale);
  }
}

TEST_CASE("newton direction pushes a scalar QP toward its constrained optimum") {
  // min (z-2)^2 s.t. z <= 1 from z=0: the step must move z up toward 1.
  QpProblem qp;
  qp.H = MatrixXd::Constant(1, 1, 2.0);
  qp.b = VectorXd::Constant(1, -4.0);
  qp.G = MatrixXd::Constant(1, 1, 1.0);
  qp.h = VectorXd::Constant(1, 1.0);
  qp.E.resize(0, 1);
  qp.d.resize(0);
  SolverState s;
  s.z = VectorXd::Zero(1);
  s.lambda.resize(0);
  s.eta = VectorXd::Ones(1);
  s.pi = VectorXd::Ones(1);
  const VectorXd F = kkt_residual(qp, s, 1e4, 0.0);
  const NewtonDirection dir = newton_direction(qp, s, F, 1e4);
  REQUIRE(dir.ok);
  CHECK(dir.dz(0) > 0.0);
  const auto result = solve(qp, SolverConfig{}, VectorXd::Zero(1));
  REQUIRE(result.ok());
  CHECK(result.z(0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("equality-only problems reduce to the saddle solve") {
  QpProblem qp;
  qp.H = 2.0 * MatrixXd::Identity(2, 2);
  qp.b = VectorXd::Zero(2);
  qp.G.resize(0, 2);
  qp.h.resize(0);
  qp.E = MatrixXd::Ones(1, 2);
  qp.d = VectorXd::Constant(1, 2.0);
  const auto result = solve(qp, SolverConfig{}, VectorXd::Zero(2));
  REQUIRE(result.ok());
  CHECK(result.z(0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(result.z(1) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("step length: fraction to boundary") {
  SolverState s;
  s.z.resize(0);
  s.lambda.resize(0);
  NewtonDirection dir;
  dir.ok = true;

  SUBCASE("no blocking component gives the cap") {
    s.eta = VectorXd::Ones(2);
    s.pi = VectorXd::Ones(2);
    dir.deta = VectorXd::Ones(2);
    dir.dpi = VectorXd::Zero(2);
    CHECK(step_length(s, dir, 0.995) == doctest::Approx(0.995));
  }
  SUBCASE("single blocking multiplier") {
    s.eta = VectorXd::Ones(1);
    s.pi = VectorXd::Ones(1);
    dir.deta = VectorXd::Constant(1, -2.0);
    dir.dpi = VectorXd::Zero(1);
    CHECK(step_length(s, dir, 0.995) == doctest::Approx(0.4975));
  }
  SUBCASE("minimum over slack ratios") {
    s.eta = VectorXd::Ones(2);
    s.pi.resize(2);
    s.pi << 1.0, 4.0;
    dir.deta = VectorXd::Zero(2);
    dir.dpi.resize(2);
    dir.dpi << -1.0, -8.0;
    CHECK(step_length(s, dir, 0.995) == doctest::Approx(0.995 * 0.5));
  }
}

TEST_CASE("solve: unconstrained and symmetric examples") {
  SUBCASE("min (z-3)^2 with no rows at all") {
    QpProblem qp;
    qp.H = MatrixXd::Constant(1, 1, 2.0);
    qp.b = VectorXd::Constant(1, -6.0);
    qp.c = 9.0;
    qp.G.resize(0, 1);
    qp.h.resize(0);
    qp.E.resize(0, 1);
    qp.d.resize(0);
    SolverConfig cfg;
    cfg.tol = 1e-9;
    const auto result = solve(qp, cfg, VectorXd::Zero(1));
    REQUIRE(result.ok());
    CHECK(result.z(0) == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(qp.objective(result.z) < 1e-12);
  }
  SUBCASE("padding rows are dropped before solving") {
    QpProblem qp;
    qp.H = MatrixXd::Constant(1, 1, 2.0);
    qp.b = VectorXd::Constant(1, -6.0);
    qp.G = MatrixXd::Zero(3, 1);
    qp.G(0, 0) = 1.0;
    qp.h = VectorXd::Zero(3);
    qp.h(0) = 100.0;  // slack bound, never active
    qp.E.resize(0, 1);
    qp.d.resize(0);
    CHECK(qp.kkt_dimension() == 7);
    CHECK(qp.without_zero_rows().num_ineq() == 1);
    const auto result = solve(qp, SolverConfig{}, VectorXd::Zero(1));
    REQUIRE(result.ok());
    CHECK(result.z(0) == doctest::Approx(3.0).epsilon(1e-9));
  }
}

TEST_CASE("random strictly convex QPs match the active-set oracle") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> nd(2, 12), md(1, 8), pd(0, 4);
  int solved = 0;
  for (int rep = 0; rep < 60; ++rep) {
    const int n = nd(rng);
    const int m = md(rng);
    const int p = std::min(pd(rng), n - 1);
    QpProblem qp = random_qp(rng, n, m, p);
    const auto oracle = testing::active_set_solve(qp.H, qp.b, qp.G, qp.h, qp.E, qp.d);
    REQUIRE(oracle.has_value());
    SolverConfig cfg;
    cfg.tol = 1e-9;
    const auto result = solve(qp, cfg, VectorXd::Zero(n));
    REQUIRE(result.ok());
    CHECK(result.residual_norm < 1e-6);
    CHECK((result.z - *oracle).lpNorm<Eigen::Infinity>() <= 1e-6);
    // Feasibility of the returned point.
    if (qp.num_ineq() > 0) CHECK(((qp.G * result.z - qp.h).maxCoeff()) <= 1e-6);
    if (qp.num_eq() > 0) CHECK((qp.E * result.z - qp.d).lpNorm<Eigen::Infinity>() <= 1e-6);
    ++solved;
  }
  CHECK(solved == 60);
}

TEST_CASE("multipliers and slacks stay strictly positive across iterations") {
  std::mt19937_64 rng(99);
  for (int rep = 0; rep < 10; ++rep) {
    QpProblem qp = random_qp(rng, 8, 6, 2);
    SolverState s = initial_state(qp, VectorXd::Zero(8));
    SolverConfig cfg;
    for (int it = 0; it < 60; ++it) {
      if (kkt_residual(qp, s, cfg.penalty, 0.0).norm() < 1e-9) break;
      const VectorXd F = kkt_residual(qp, s, cfg.penalty, cfg.centering);
      const NewtonDirection dir = newton_direction(qp, s, F, cfg.penalty);
      REQUIRE(dir.ok);
      const double delta = step_length(s, dir, cfg.boundary_frac);
      s.z += delta * dir.dz;
      s.lambda += delta * dir.dlambda;
      s.eta += delta * dir.deta;
      s.pi += delta * dir.dpi;
      REQUIRE(s.eta.minCoeff() > 0.0);
      REQUIRE(s.pi.minCoeff() > 0.0);
    }
  }
}

TEST_CASE("refresh-free convergence for larger random problems") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 12; ++rep) {
    QpProblem qp = random_qp(rng, 20, 10, 4);
    SolverConfig cfg;
    cfg.max_iter = 200;
    const auto result = solve(qp, cfg, VectorXd::Zero(20));
    REQUIRE(result.ok());
    CHECK(result.residual_norm < cfg.tol);
  }
}
