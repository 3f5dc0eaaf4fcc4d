#include "ecoplatoon/horizon_qp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ecoplatoon {

namespace {

Eigen::Matrix2d control_block(double dt, double mass) {
  Eigen::Matrix2d B;
  B << dt / mass, -dt / mass, dt * dt / (2.0 * mass), -dt * dt / (2.0 * mass);
  return B;
}

/// Linearized state-transition block at iterate (v, s). The drag force is
/// linearized as xi*v_iter*v and the grade/rolling force as its value at the
/// iterate scaled by s/s_iter; the denominator is kept away from zero.
Eigen::Matrix2d transition_block(const HorizonModel& m, int k, double v_iter, double s_iter) {
  const double dt = m.dt;
  const double mass = m.mass;
  const double v = std::max(v_iter, 0.0);
  const double s = std::max(s_iter, 1.0);
  const double xi = m.drag_coeff(k, s_iter);
  const double grade = grade_resistance(*m.aero, *m.params, *m.road, s_iter, m.gravity_mass_scaling);
  Eigen::Matrix2d A;
  A(0, 0) = 1.0 - (dt / mass) * xi * v;
  A(0, 1) = -(dt / (mass * s)) * grade;
  A(1, 0) = dt - (dt * dt / (2.0 * mass)) * xi * v;
  A(1, 1) = 1.0 - (dt * dt / (2.0 * mass * s)) * grade;
  return A;
}

}  // namespace

QpProblem build_horizon_qp(int K, double v0, double s0, const HorizonModel& model,
                           const HorizonCost& cost, const HorizonBounds& bounds) {
  if (K < 1) throw std::invalid_argument("horizon must be at least one stage");
  if (cost.lin_v.size() != static_cast<size_t>(K) + 1 ||
      cost.lin_s.size() != static_cast<size_t>(K) + 1 ||
      bounds.pos_rows.size() != static_cast<size_t>(K) + 1)
    throw std::invalid_argument("per-stage vectors must have length K+1");
  if (!model.road || !model.params || !model.aero || !model.drag_coeff)
    throw std::invalid_argument("horizon model is incomplete");

  const Eigen::Index n = 4 * static_cast<Eigen::Index>(K);
  const double dt = model.dt;
  const FuelCoeffs& fc = model.params->fuel;
  const double cw = cost.fuel_weight * dt;
  const double s11 = fc.quad[0][0] * cw;
  const double s12 = fc.quad[0][1] * cw;
  const double s21 = fc.quad[1][0] * cw;
  const double s22 = fc.quad[1][1] * cw;
  const double sb1 = fc.lin[0] * cw;
  const double sb2 = fc.lin[1] * cw;

  QpProblem qp;
  qp.H = Eigen::MatrixXd::Zero(n, n);
  qp.b = Eigen::VectorXd::Zero(n);
  qp.c = cost.constant + fc.konst * cw * K;

  // Hessian/linear blocks; the stored H carries the factor 2 so the objective
  // is 1/2 z^T H z + b^T z.
  qp.H(0, 0) = 2.0 * s11;
  qp.H(1, 1) = 2.0 * cost.brake_weight;
  qp.b(0) = 2.0 * s21 * v0 + sb1;
  for (int k = 1; k < K; ++k) {
    const Eigen::Index xv = state_index(k);
    const Eigen::Index xs = xv + 1;
    const Eigen::Index uf = control_index(k);
    const Eigen::Index ub = uf + 1;
    qp.H(xv, xv) = 2.0 * (cost.quad_v + s22);
    qp.H(xs, xs) = 2.0 * cost.quad_s;
    qp.H(xv, uf) = 2.0 * s21;
    qp.H(uf, xv) = 2.0 * s12;
    qp.H(uf, uf) = 2.0 * s11;
    qp.H(ub, ub) = 2.0 * cost.brake_weight;
    qp.b(xv) = cost.lin_v[k] + sb2;
    qp.b(xs) = cost.lin_s[k];
    qp.b(uf) = sb1;
  }
  {
    const Eigen::Index xv = state_index(K);
    qp.H(xv, xv) = 2.0 * cost.quad_v;
    qp.H(xv + 1, xv + 1) = 2.0 * cost.quad_s;
    qp.b(xv) = cost.lin_v[K] + sb2;
    qp.b(xv + 1) = cost.lin_s[K];
  }

  // Inequalities: 4 control rows and 4 state rows per stage, zero padding kept.
  const Eigen::Index m_rows = 8 * static_cast<Eigen::Index>(K);
  qp.G = Eigen::MatrixXd::Zero(m_rows, n);
  qp.h = Eigen::VectorXd::Zero(m_rows);
  for (int k = 0; k < K; ++k) {
    const Eigen::Index row = 8 * static_cast<Eigen::Index>(k);
    const Eigen::Index uf = control_index(k);
    qp.G(row + 0, uf) = 1.0;
    qp.h(row + 0) = bounds.max_traction;
    qp.G(row + 1, uf) = -1.0;
    qp.G(row + 2, uf + 1) = 1.0;
    qp.h(row + 2) = bounds.max_brake;
    qp.G(row + 3, uf + 1) = -1.0;
    const Eigen::Index xv = state_index(k + 1);
    qp.G(row + 4, xv) = 1.0;
    qp.h(row + 4) = bounds.v_max;
    qp.G(row + 5, xv) = -1.0;
    qp.G(row + 6, xv + 1) = bounds.pos_rows[k + 1].coeff;
    qp.h(row + 6) = bounds.pos_rows[k + 1].rhs;
    // row + 7 stays identically zero.
  }

  // Equalities: x(k+1) = A_k x(k) + B u(k), with A evaluated along the iterate.
  const Eigen::Matrix2d B = control_block(dt, model.mass);
  qp.E = Eigen::MatrixXd::Zero(2 * static_cast<Eigen::Index>(K), n);
  qp.d = Eigen::VectorXd::Zero(2 * static_cast<Eigen::Index>(K));
  qp.E.block(0, control_index(0), 2, 2) = -B;
  qp.E.block(0, state_index(1), 2, 2) = Eigen::Matrix2d::Identity();
  const Eigen::Matrix2d A0 = transition_block(model, 0, v0, s0);
  qp.d.head(2) = A0 * Eigen::Vector2d(v0, s0);
  for (int mu = 2; mu <= K; ++mu) {
    const Eigen::Index row = 2 * static_cast<Eigen::Index>(mu - 1);
    // Placeholder A at the hold-speed rollout; refresh overwrites it.
    const double s_guess = s0 + v0 * dt * (mu - 1);
    qp.E.block(row, state_index(mu - 1), 2, 2) = -transition_block(model, mu - 1, v0, s_guess);
    qp.E.block(row, control_index(mu - 1), 2, 2) = -B;
    qp.E.block(row, state_index(mu), 2, 2) = Eigen::Matrix2d::Identity();
  }

  HorizonModel captured = model;
  const int horizon = K;
  qp.refresh = [captured, horizon](const Eigen::VectorXd& z, Eigen::MatrixXd& E,
                                   Eigen::VectorXd&) {
    for (int mu = 2; mu <= horizon; ++mu) {
      const Eigen::Index row = 2 * static_cast<Eigen::Index>(mu - 1);
      const double v_iter = z(state_index(mu - 1));
      const double s_iter = z(state_index(mu - 1) + 1);
      E.block(row, state_index(mu - 1), 2, 2) = -transition_block(captured, mu - 1, v_iter, s_iter);
    }
  };
  return qp;
}

Eigen::VectorXd rollout_hold_speed(int K, double v0, double s0, double dt) {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(4 * static_cast<Eigen::Index>(K));
  for (int k = 1; k <= K; ++k) {
    z(state_index(k)) = v0;
    z(state_index(k) + 1) = s0 + v0 * dt * k;
  }
  return z;
}

Eigen::VectorXd shift_warm_start(const Eigen::VectorXd& z, int K, double dt) {
  Eigen::VectorXd out = z;
  if (K < 2) return out;
  out.head(4 * (K - 1)) = z.tail(4 * (K - 1));
  // Repeat the last control, extend the last state at constant speed.
  out.segment(control_index(K - 1), 2) = z.segment(control_index(K - 1), 2);
  const double v_last = z(state_index(K));
  const double s_last = z(state_index(K) + 1);
  out(state_index(K)) = v_last;
  out(state_index(K) + 1) = s_last + v_last * dt;
  return out;
}

}  // namespace ecoplatoon
