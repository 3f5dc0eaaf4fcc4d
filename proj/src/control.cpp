#include "ecoplatoon/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ecoplatoon {

namespace {

/// Message to send when the solver fails: previous prediction advanced one step
/// with a constant-speed tail.
PredictionMessage shift_message(const PredictionMessage& msg, double dt) {
  PredictionMessage out = msg;
  out.base = msg.base + 1;
  const size_t n = msg.speeds.size();
  for (size_t k = 0; k + 1 < n; ++k) {
    out.speeds[k] = msg.speeds[k + 1];
    out.positions[k] = msg.positions[k + 1];
  }
  out.speeds[n - 1] = msg.speeds[n - 1];
  out.positions[n - 1] = msg.positions[n - 1] + msg.speeds[n - 1] * dt;
  return out;
}

PredictionMessage message_from_solution(int sender, long t, const VehicleState& measured,
                                        const Eigen::VectorXd& z, int K, double dt) {
  // Accelerations recovered from the solved speed sequence, then rolled through
  // the exact kinematics so the broadcast is self-consistent.
  std::vector<double> accels(K);
  double v_prev = measured.speed;
  for (int k = 0; k < K; ++k) {
    const double v_next = z(state_index(k + 1));
    accels[k] = (v_next - v_prev) / dt;
    v_prev = v_next;
  }
  auto [speeds, positions] = predict_trajectory(measured, accels, dt);
  PredictionMessage msg;
  msg.sender = sender;
  msg.base = t;
  msg.speeds = std::move(speeds);
  msg.positions = std::move(positions);
  return msg;
}

ControlOutput fallback_output(std::optional<ControlOutput>& previous, int sender, long t,
                              const VehicleState& measured, double dt, int K, bool safety,
                              double traction, double brake) {
  ControlOutput out;
  out.solver_ok = false;
  out.safety_fallback = safety;
  if (previous) {
    out.traction = safety ? traction : previous->traction;
    out.brake = safety ? brake : previous->brake;
    out.message = shift_message(previous->message, dt);
  } else {
    out.traction = traction;
    out.brake = brake;
    std::vector<double> accels(K, 0.0);
    auto [speeds, positions] = predict_trajectory(measured, accels, dt);
    out.message = {sender, t, std::move(speeds), std::move(positions)};
  }
  previous = out;
  return out;
}

}  // namespace

void ControllerWeights::validate() const {
  if (track_v < 0.0 || track_s < 0.0 || fuel < 0.0 || brake < 0.0 || leader_v < 0.0 ||
      leader_s < 0.0)
    throw std::invalid_argument("controller weights must be nonnegative");
  if (horizon < 1) throw std::invalid_argument("controller horizon must be >= 1");
}

std::pair<std::vector<double>, std::vector<double>> predict_trajectory(
    const VehicleState& state, const std::vector<double>& accels, double dt) {
  std::vector<double> speeds(accels.size() + 1);
  std::vector<double> positions(accels.size() + 1);
  speeds[0] = state.speed;
  positions[0] = state.position;
  for (size_t k = 0; k < accels.size(); ++k) {
    speeds[k + 1] = speeds[k] + accels[k] * dt;
    positions[k + 1] = positions[k] + speeds[k] * dt + 0.5 * accels[k] * dt * dt;
  }
  return {speeds, positions};
}

LeaderController::LeaderController(ControllerWeights weights, HorizonModel model, double v_max,
                                   SolverConfig solver)
    : weights_(std::move(weights)), model_(std::move(model)), v_max_(v_max), solver_(solver) {
  weights_.validate();
}

ControlOutput LeaderController::step(long t, const VehicleState& measured,
                                     const PlanProfile& plan) {
  const int K = weights_.horizon;
  const double dt = model_.dt;
  if (!plan.covers(t, K))
    throw std::logic_error("long-term plan does not cover the real-time horizon");

  HorizonCost cost;
  cost.fuel_weight = weights_.fuel;
  cost.brake_weight = weights_.brake;
  cost.quad_v = weights_.track_v;
  cost.quad_s = weights_.track_s;
  cost.lin_v.assign(K + 1, 0.0);
  cost.lin_s.assign(K + 1, 0.0);
  HorizonBounds bounds;
  bounds.max_traction = model_.params->max_traction;
  bounds.max_brake = model_.params->max_brake;
  bounds.v_max = v_max_;
  bounds.pos_rows.assign(K + 1, PositionRow{});
  for (int k = 1; k <= K; ++k) {
    cost.lin_v[k] = -2.0 * weights_.track_v * plan.speed_at(t + k);
    cost.lin_s[k] = -2.0 * weights_.track_s * plan.position_at(t + k);
    bounds.pos_rows[k] = {1.0, measured.position + v_max_ * dt * k};
  }

  QpProblem qp = build_horizon_qp(K, measured.speed, measured.position, model_, cost, bounds);

  Eigen::VectorXd z0 = (warm_step_ + 1 == t) ? shift_warm_start(warm_, K, dt)
                                             : rollout_hold_speed(K, measured.speed,
                                                                  measured.position, dt);
  SolveResult solved = solve(qp, solver_, z0);
  if (!solved.ok())
    return fallback_output(previous_, 0, t, measured, dt, K, false, 0.0, 0.0);

  warm_ = solved.z;
  warm_step_ = t;
  ControlOutput out;
  out.traction = std::clamp(solved.z(control_index(0)), 0.0, model_.params->max_traction);
  out.brake = std::clamp(solved.z(control_index(0) + 1), 0.0, model_.params->max_brake);
  out.message = message_from_solution(0, t, measured, solved.z, K, dt);
  previous_ = out;
  return out;
}

FollowerController::FollowerController(int index, ControllerWeights weights, HorizonModel model,
                                       double v_max, double desired_gap, double safe_distance,
                                       SolverConfig solver)
    : index_(index),
      weights_(std::move(weights)),
      model_(std::move(model)),
      v_max_(v_max),
      desired_gap_(desired_gap),
      safe_distance_(safe_distance),
      solver_(solver) {
  weights_.validate();
  if (index_ < 1) throw std::invalid_argument("follower index starts at 1");
  if (index_ == 1 && (weights_.leader_v != 0.0 || weights_.leader_s != 0.0))
    throw std::invalid_argument("vehicle 2 duplicates the leader terms; its extra weights must be 0");
}

ControlOutput FollowerController::step(long t, const VehicleState& measured,
                                       const PredictionMessage& leader_msg,
                                       const PredictionMessage& predecessor_msg) {
  const int K = weights_.horizon;
  const double dt = model_.dt;
  if (predecessor_msg.base > t || predecessor_msg.base + predecessor_msg.horizon() < t + K ||
      leader_msg.base > t || leader_msg.base + leader_msg.horizon() < t + K)
    throw std::logic_error("prediction messages do not cover the follower horizon");

  // Already inside the safety margin: brake as hard as possible.
  if (measured.position > predecessor_msg.position_at(t) - safe_distance_)
    return fallback_output(previous_, index_, t, measured, dt, K, true, 0.0,
                           model_.params->max_brake);

  HorizonCost cost;
  cost.fuel_weight = weights_.fuel;
  cost.brake_weight = weights_.brake;
  cost.quad_v = weights_.track_v + weights_.leader_v;
  cost.quad_s = weights_.track_s + weights_.leader_s;
  cost.lin_v.assign(K + 1, 0.0);
  cost.lin_s.assign(K + 1, 0.0);
  HorizonBounds bounds;
  bounds.max_traction = model_.params->max_traction;
  bounds.max_brake = model_.params->max_brake;
  bounds.v_max = v_max_;
  bounds.pos_rows.assign(K + 1, PositionRow{});

  std::vector<double> predecessor_pos(K + 1);
  for (int k = 0; k <= K; ++k) predecessor_pos[k] = predecessor_msg.position_at(t + k);
  for (int k = 1; k <= K; ++k) {
    const double v_pred = predecessor_msg.speed_at(t + k);
    const double v_lead = leader_msg.speed_at(t + k);
    const double s_target_pred = predecessor_pos[k] - desired_gap_;
    const double s_target_lead = leader_msg.position_at(t + k) - index_ * desired_gap_;
    cost.lin_v[k] = -2.0 * (weights_.track_v * v_pred + weights_.leader_v * v_lead);
    cost.lin_s[k] = -2.0 * (weights_.track_s * s_target_pred + weights_.leader_s * s_target_lead);
    cost.constant += weights_.track_v * v_pred * v_pred + weights_.leader_v * v_lead * v_lead +
                     weights_.track_s * s_target_pred * s_target_pred +
                     weights_.leader_s * s_target_lead * s_target_lead;
    bounds.pos_rows[k] = {1.0, predecessor_pos[k] - safe_distance_};
  }

  // Gap-dependent drag: the predecessor path is known over the horizon.
  HorizonModel model = model_;
  const AeroConfig* aero = model_.aero;
  const VehicleParams* params = model_.params;
  model.drag_coeff = [aero, params, predecessor_pos](int k, double s_iter) {
    const size_t idx = std::min<size_t>(static_cast<size_t>(std::max(k, 0)),
                                        predecessor_pos.size() - 1);
    const double gap = std::max(predecessor_pos[idx] - s_iter, 0.1);
    return air_drag_coefficient(*aero, *params, gap);
  };

  QpProblem qp = build_horizon_qp(K, measured.speed, measured.position, model, cost, bounds);

  Eigen::VectorXd z0 = (warm_step_ + 1 == t) ? shift_warm_start(warm_, K, dt)
                                             : rollout_hold_speed(K, measured.speed,
                                                                  measured.position, dt);
  SolveResult solved = solve(qp, solver_, z0);
  if (!solved.ok())
    return fallback_output(previous_, index_, t, measured, dt, K, true, 0.0,
                           model_.params->max_brake);

  warm_ = solved.z;
  warm_step_ = t;
  ControlOutput out;
  out.traction = std::clamp(solved.z(control_index(0)), 0.0, model_.params->max_traction);
  out.brake = std::clamp(solved.z(control_index(0) + 1), 0.0, model_.params->max_brake);
  out.message = message_from_solution(index_, t, measured, solved.z, K, dt);
  previous_ = out;
  return out;
}

}  // namespace ecoplatoon
