#pragma once

#include <functional>
#include <vector>

#include "ecoplatoon/dynamics.hpp"
#include "ecoplatoon/qp.hpp"

namespace ecoplatoon {

/// Decision-vector layout shared by the long-term and real-time problems:
/// z = [u(0), x(1), u(1), x(2), ..., u(K-1), x(K)] with u = [F_T, F_B] and
/// x = [v, s], so n = 4K.
inline Eigen::Index control_index(int k) { return 4 * static_cast<Eigen::Index>(k); }
inline Eigen::Index state_index(int k) { return 4 * static_cast<Eigen::Index>(k) - 2; }

/// Vehicle + environment data the dynamics linearization needs. `drag_coeff`
/// returns xi_{i,d} at stage k for the given iterate position (followers look up
/// the predicted predecessor position to form the gap).
struct HorizonModel {
  double dt = 0.5;
  double mass = 0.0;
  const RoadProfile* road = nullptr;
  const VehicleParams* params = nullptr;
  const AeroConfig* aero = nullptr;
  bool gravity_mass_scaling = true;
  std::function<double(int k, double s_iterate)> drag_coeff;
};

/// Quadratic tracking cost pieces. lin_v / lin_s hold the assembled linear
/// coefficients -2 sum(w * target) per stage (index 1..K); the builder adds the
/// fuel model's own linear terms.
struct HorizonCost {
  double fuel_weight = 0.0;   // gamma_P or omega_p
  double brake_weight = 0.0;  // gamma_B or omega_B
  double quad_v = 0.0;        // total weight on v(k)^2
  double quad_s = 0.0;        // total weight on s(k)^2
  std::vector<double> lin_v;  // length K+1, entry 0 unused
  std::vector<double> lin_s;
  double constant = 0.0;      // sum of w * target^2, so objective(z) matches J
};

/// One inequality row on a stage position: coeff * s(k) <= rhs.
struct PositionRow {
  double coeff = 1.0;
  double rhs = 0.0;
};

struct HorizonBounds {
  double max_traction = 0.0;
  double max_brake = 0.0;
  double v_max = 0.0;
  std::vector<PositionRow> pos_rows;  // length K+1, entry 0 unused
};

/// Assemble the compact-form QP over K stages from measured state (v0, s0).
/// The inequality block keeps the printed 4-row-per-stage pattern, including
/// the zero padding rows; prune them before solving. The equality block carries
/// the state-dependent linearization and a refresh callback that re-evaluates
/// it at the current iterate.
QpProblem build_horizon_qp(int K, double v0, double s0, const HorizonModel& model,
                           const HorizonCost& cost, const HorizonBounds& bounds);

/// Kinematic rollout used for warm starts: constant speed, zero control.
Eigen::VectorXd rollout_hold_speed(int K, double v0, double s0, double dt);

/// Shift a solved horizon vector one stage forward, replicating the last stage
/// with a constant-speed extension.
Eigen::VectorXd shift_warm_start(const Eigen::VectorXd& z, int K, double dt);

}  // namespace ecoplatoon
