#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "ecoplatoon/horizon_qp.hpp"
#include "ecoplatoon/planner.hpp"

namespace ecoplatoon {

/// Weights of the real-time problems. track_* act on the nearest target (the
/// plan for the leader, the preceding vehicle for a follower); leader_* are the
/// follower's extra terms toward the platoon leader and must be zero for
/// vehicle 2, whose predecessor is the leader itself.
struct ControllerWeights {
  double track_v = 0.0;
  double track_s = 0.0;
  double fuel = 0.0;   // omega_p
  double brake = 0.0;  // omega_B
  double leader_v = 0.0;
  double leader_s = 0.0;
  int horizon = 12;  // Kbar

  void validate() const;
};

/// Short-horizon state prediction a vehicle broadcasts after solving its
/// real-time problem. speeds/positions have horizon+1 entries starting at base.
struct PredictionMessage {
  int sender = 0;
  long base = 0;
  std::vector<double> speeds;
  std::vector<double> positions;

  double speed_at(long t) const { return speeds.at(static_cast<size_t>(t - base)); }
  double position_at(long t) const { return positions.at(static_cast<size_t>(t - base)); }
  int horizon() const { return static_cast<int>(speeds.size()) - 1; }
};

struct ControlOutput {
  double traction = 0.0;
  double brake = 0.0;
  PredictionMessage message;
  bool solver_ok = true;
  bool safety_fallback = false;
};

/// Forward simulation of Eqs of motion under a given acceleration sequence;
/// returns (speeds, positions) with accels.size()+1 entries each.
std::pair<std::vector<double>, std::vector<double>> predict_trajectory(
    const VehicleState& state, const std::vector<double>& accels, double dt);

/// Real-time tracking controller for the leader: follows the latest long-term
/// profile over its horizon and broadcasts the resulting prediction.
class LeaderController {
 public:
  LeaderController(ControllerWeights weights, HorizonModel model, double v_max,
                   SolverConfig solver);

  ControlOutput step(long t, const VehicleState& measured, const PlanProfile& plan);

 private:
  ControllerWeights weights_;
  HorizonModel model_;
  double v_max_;
  SolverConfig solver_;
  Eigen::VectorXd warm_;
  long warm_step_ = std::numeric_limits<long>::min() / 4;
  std::optional<ControlOutput> previous_;
};

/// Real-time controller for follower i: tracks the predecessor's and the
/// leader's predictions and enforces the hard collision-avoidance bound
/// s_i(k) <= s_{i-1}(k) - safe_distance over the whole horizon.
class FollowerController {
 public:
  FollowerController(int index, ControllerWeights weights, HorizonModel model, double v_max,
                     double desired_gap, double safe_distance, SolverConfig solver);

  ControlOutput step(long t, const VehicleState& measured, const PredictionMessage& leader_msg,
                     const PredictionMessage& predecessor_msg);

 private:
  int index_;
  ControllerWeights weights_;
  HorizonModel model_;
  double v_max_;
  double desired_gap_;
  double safe_distance_;
  SolverConfig solver_;
  Eigen::VectorXd warm_;
  long warm_step_ = std::numeric_limits<long>::min() / 4;
  std::optional<ControlOutput> previous_;
};

}  // namespace ecoplatoon
