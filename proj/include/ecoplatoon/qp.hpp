#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <string>

namespace ecoplatoon {

/// Convex QP in the compact form
///   min 1/2 z^T H z + b^T z + c   s.t.  G z <= h,  E z = d.
/// For the receding-horizon problems E and d depend on the linearization point;
/// `refresh` recomputes them from the current iterate between Newton steps.
struct QpProblem {
  Eigen::MatrixXd H;
  Eigen::VectorXd b;
  double c = 0.0;
  Eigen::MatrixXd G;
  Eigen::VectorXd h;
  Eigen::MatrixXd E;
  Eigen::VectorXd d;
  std::function<void(const Eigen::VectorXd& z, Eigen::MatrixXd& E, Eigen::VectorXd& d)> refresh;

  Eigen::Index num_vars() const { return H.rows(); }
  Eigen::Index num_ineq() const { return G.rows(); }
  Eigen::Index num_eq() const { return E.rows(); }

  /// Length of the stacked KKT residual, 2m + n + p, before any row pruning.
  Eigen::Index kkt_dimension() const { return num_vars() + num_eq() + 2 * num_ineq(); }

  double objective(const Eigen::VectorXd& z) const {
    return 0.5 * z.dot(H * z) + b.dot(z) + c;
  }

  /// Throws std::invalid_argument on inconsistent dimensions or asymmetric H.
  void validate() const;

  /// Copy with identically-zero inequality rows (zero rhs) removed. Zero rows
  /// carry no slack information and would break the diagonal scaling in the
  /// Newton system.
  QpProblem without_zero_rows() const;
};

/// Primal-dual iterate: primal z, equality multiplier lambda, inequality
/// multiplier eta > 0, slack pi > 0.
struct SolverState {
  Eigen::VectorXd z;
  Eigen::VectorXd lambda;
  Eigen::VectorXd eta;
  Eigen::VectorXd pi;
};

struct SolverConfig {
  double penalty = 1e4;        // xi, augmented-Lagrangian weight on E z = d
  double tol = 1e-6;           // epsilon on ||F||
  double boundary_frac = 0.995;  // varpi, fraction-to-boundary cap
  double centering = 0.1;      // sigma; 0 recovers the plain Newton target
  int max_iter = 200;
  std::ostream* trace = nullptr;  // optional per-iteration CSV: iter, ||F||, delta, mu
};

enum class SolveStatus { Converged, MaxIterations, SingularSystem };

struct SolveResult {
  SolveStatus status = SolveStatus::MaxIterations;
  Eigen::VectorXd z;
  int iterations = 0;
  double residual_norm = 0.0;
  SolverState state;  // final iterate, also returned on failure
  std::string note;

  bool ok() const { return status == SolveStatus::Converged; }
};

/// Stacked KKT residual
///   [ Hbar z + bbar + E^T lambda + G^T eta;  E z - d;  G z - h + pi;
///     Pi eta - sigma mu 1 ]
/// with Hbar = H + (xi/2) E^T E and bbar = b - xi E^T d. sigma = 0 gives the
/// plain complementarity row.
Eigen::VectorXd kkt_residual(const QpProblem& p, const SolverState& s, double penalty,
                             double centering_sigma = 0.0);

struct NewtonDirection {
  Eigen::VectorXd dz, dlambda, deta, dpi;
  bool ok = false;
  std::string note;
};

/// Block elimination of the Newton system J * delta = -F: the reduced matrix
/// Hbreve = Hbar + G^T Pi^{-1} Psi G is factored once, then lambda, z, eta, pi
/// are recovered in turn.
NewtonDirection newton_direction(const QpProblem& p, const SolverState& s,
                                 const Eigen::VectorXd& residual, double penalty);

/// Largest step in (0, boundary_frac] keeping eta and pi strictly positive.
double step_length(const SolverState& s, const NewtonDirection& dir, double boundary_frac);

/// Default start: lambda = 0, eta = 1, pi = max(h - G z0, 1) elementwise.
SolverState initial_state(const QpProblem& p, const Eigen::VectorXd& z0);

SolveResult solve(const QpProblem& p, const SolverConfig& config, SolverState state);
SolveResult solve(const QpProblem& p, const SolverConfig& config, const Eigen::VectorXd& z0);

}  // namespace ecoplatoon
