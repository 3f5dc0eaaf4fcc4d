#include "ecoplatoon/qp.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace ecoplatoon {

void QpProblem::validate() const {
  const auto n = num_vars();
  if (H.cols() != n || b.size() != n)
    throw std::invalid_argument("qp: H/b dimension mismatch");
  if (!H.isApprox(H.transpose(), 1e-10)) throw std::invalid_argument("qp: H must be symmetric");
  if (G.rows() != h.size() || (G.size() > 0 && G.cols() != n))
    throw std::invalid_argument("qp: G/h dimension mismatch");
  if (E.rows() != d.size() || (E.size() > 0 && E.cols() != n))
    throw std::invalid_argument("qp: E/d dimension mismatch");
}

QpProblem QpProblem::without_zero_rows() const {
  QpProblem out = *this;
  const Eigen::Index m = G.rows();
  Eigen::Index kept = 0;
  for (Eigen::Index i = 0; i < m; ++i)
    if (G.row(i).lpNorm<Eigen::Infinity>() > 0.0 || h(i) != 0.0) ++kept;
  if (kept == m) return out;
  out.G.resize(kept, G.cols());
  out.h.resize(kept);
  Eigen::Index j = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (G.row(i).lpNorm<Eigen::Infinity>() > 0.0 || h(i) != 0.0) {
      out.G.row(j) = G.row(i);
      out.h(j) = h(i);
      ++j;
    }
  }
  return out;
}

Eigen::VectorXd kkt_residual(const QpProblem& p, const SolverState& s, double penalty,
                             double centering_sigma) {
  const Eigen::Index n = p.num_vars();
  const Eigen::Index m = p.num_ineq();
  const Eigen::Index pe = p.num_eq();
  if (s.z.size() != n || s.lambda.size() != pe || s.eta.size() != m || s.pi.size() != m)
    throw std::invalid_argument("qp: solver state dimension mismatch");

  Eigen::VectorXd F(p.kkt_dimension());
  Eigen::VectorXd stat = p.H * s.z + p.b;
  if (pe > 0) {
    stat += (0.5 * penalty) * (p.E.transpose() * (p.E * s.z));
    stat -= penalty * (p.E.transpose() * p.d);
    stat += p.E.transpose() * s.lambda;
  }
  if (m > 0) stat += p.G.transpose() * s.eta;
  F.head(n) = stat;
  if (pe > 0) F.segment(n, pe) = p.E * s.z - p.d;
  if (m > 0) {
    F.segment(n + pe, m) = p.G * s.z - p.h + s.pi;
    Eigen::VectorXd comp = s.pi.cwiseProduct(s.eta);
    if (centering_sigma > 0.0) {
      const double mu = s.pi.dot(s.eta) / static_cast<double>(m);
      comp.array() -= centering_sigma * mu;
    }
    F.tail(m) = comp;
  }
  return F;
}

NewtonDirection newton_direction(const QpProblem& p, const SolverState& s,
                                 const Eigen::VectorXd& residual, double penalty) {
  const Eigen::Index n = p.num_vars();
  const Eigen::Index m = p.num_ineq();
  const Eigen::Index pe = p.num_eq();
  NewtonDirection out;

  // RHS convention: solve J delta = r with r = -F.
  const Eigen::VectorXd r = -residual;
  const Eigen::VectorXd r_z = r.head(n);
  const Eigen::VectorXd r_lambda = r.segment(n, pe);
  const Eigen::VectorXd r_eta = r.segment(n + pe, m);
  const Eigen::VectorXd r_pi = r.tail(m);

  Eigen::MatrixXd Hbar = p.H;
  if (pe > 0) Hbar += (0.5 * penalty) * (p.E.transpose() * p.E);

  Eigen::VectorXd r_bar = r_z;
  Eigen::MatrixXd Hbreve = Hbar;
  Eigen::VectorXd pi_inv_eta;  // Pi^{-1} Psi diagonal
  if (m > 0) {
    pi_inv_eta = s.eta.cwiseQuotient(s.pi);
    Hbreve += p.G.transpose() * pi_inv_eta.asDiagonal() * p.G;
    r_bar += p.G.transpose() * (pi_inv_eta.cwiseProduct(r_eta)) -
             p.G.transpose() * (r_pi.cwiseQuotient(s.pi));
  }

  Eigen::LLT<Eigen::MatrixXd> llt(Hbreve);
  if (llt.info() != Eigen::Success) {
    // Near convergence the scaling ratios can push Hbreve to the edge of
    // numerical definiteness; a tiny diagonal shift restores the factorization.
    const double shift = 1e-10 * std::max(1.0, Hbreve.trace() / static_cast<double>(n));
    llt.compute(Hbreve + shift * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() != Eigen::Success) {
      out.note = "reduced Hessian not positive definite";
      return out;
    }
  }

  if (pe > 0) {
    const Eigen::MatrixXd Hinv_Et = llt.solve(p.E.transpose());
    const Eigen::MatrixXd schur = p.E * Hinv_Et;
    Eigen::LLT<Eigen::MatrixXd> schur_llt(schur);
    if (schur_llt.info() != Eigen::Success) {
      out.note = "equality Schur complement singular (E not row full rank?)";
      return out;
    }
    out.dlambda = schur_llt.solve(p.E * llt.solve(r_bar) - r_lambda);
    out.dz = llt.solve(r_bar - p.E.transpose() * out.dlambda);
  } else {
    out.dlambda.resize(0);
    out.dz = llt.solve(r_bar);
  }

  if (m > 0) {
    out.deta = pi_inv_eta.cwiseProduct(p.G * out.dz - r_eta + r_pi.cwiseQuotient(s.eta));
    out.dpi = (r_pi - s.pi.cwiseProduct(out.deta)).cwiseQuotient(s.eta);
  } else {
    out.deta.resize(0);
    out.dpi.resize(0);
  }
  out.ok = true;
  return out;
}

double step_length(const SolverState& s, const NewtonDirection& dir, double boundary_frac) {
  double ratio = 1.0;
  for (Eigen::Index i = 0; i < s.eta.size(); ++i)
    if (dir.deta(i) < 0.0) ratio = std::min(ratio, -s.eta(i) / dir.deta(i));
  for (Eigen::Index i = 0; i < s.pi.size(); ++i)
    if (dir.dpi(i) < 0.0) ratio = std::min(ratio, -s.pi(i) / dir.dpi(i));
  return boundary_frac * std::min(1.0, ratio);
}

SolverState initial_state(const QpProblem& p, const Eigen::VectorXd& z0) {
  SolverState s;
  s.z = z0;
  s.lambda = Eigen::VectorXd::Zero(p.num_eq());
  s.eta = Eigen::VectorXd::Ones(p.num_ineq());
  if (p.num_ineq() > 0)
    s.pi = (p.h - p.G * z0).cwiseMax(1.0);
  else
    s.pi.resize(0);
  return s;
}

SolveResult solve(const QpProblem& problem, const SolverConfig& config, SolverState state) {
  problem.validate();
  QpProblem p = problem.without_zero_rows();
  if (p.num_ineq() != problem.num_ineq() && state.eta.size() == problem.num_ineq()) {
    // State was built against the padded rows; rebuild slack/multiplier blocks.
    const Eigen::VectorXd z0 = state.z;
    const Eigen::VectorXd lambda0 = state.lambda;
    state = initial_state(p, z0);
    if (lambda0.size() == state.lambda.size()) state.lambda = lambda0;
  }

  SolveResult result;
  result.state = state;
  const Eigen::Index m = p.num_ineq();

  for (int iter = 0; iter < config.max_iter; ++iter) {
    if (p.refresh) p.refresh(state.z, p.E, p.d);

    const Eigen::VectorXd F0 = kkt_residual(p, state, config.penalty, 0.0);
    const double norm = F0.norm();
    result.iterations = iter;
    result.residual_norm = norm;
    const double mu = m > 0 ? state.pi.dot(state.eta) / static_cast<double>(m) : 0.0;
    if (norm < config.tol) {
      result.status = SolveStatus::Converged;
      result.z = state.z;
      result.state = state;
      if (config.trace) (*config.trace) << iter << ',' << norm << ",0,0\n";
      return result;
    }

    Eigen::VectorXd F = F0;
    if (m > 0 && config.centering > 0.0) F.tail(m).array() -= config.centering * mu;

    const NewtonDirection dir = newton_direction(p, state, F, config.penalty);
    if (!dir.ok) {
      result.status = SolveStatus::SingularSystem;
      result.z = state.z;
      result.state = state;
      result.note = dir.note;
      return result;
    }

    const double delta = step_length(state, dir, config.boundary_frac);
    state.z += delta * dir.dz;
    state.lambda += delta * dir.dlambda;
    if (m > 0) {
      state.eta += delta * dir.deta;
      state.pi += delta * dir.dpi;
    }
    if (config.trace) (*config.trace) << iter << ',' << norm << ',' << delta << ',' << mu << '\n';
  }

  result.status = SolveStatus::MaxIterations;
  result.z = state.z;
  result.state = state;
  result.note = "max iterations reached";
  return result;
}

SolveResult solve(const QpProblem& p, const SolverConfig& config, const Eigen::VectorXd& z0) {
  const QpProblem pruned = p.without_zero_rows();
  SolveResult r = solve(pruned, config, initial_state(pruned, z0));
  return r;
}

}  // namespace ecoplatoon
