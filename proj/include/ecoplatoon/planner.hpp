#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "ecoplatoon/horizon_qp.hpp"
#include "ecoplatoon/reachability.hpp"

namespace ecoplatoon {

struct PlannerWeights {
  double gamma_p = 0.4;
  double gamma_b = 0.01;
  double gamma_v = 0.7;
  double gamma_s = 0.001;

  void validate() const;
};

/// Long-term motion profile for the leader. Arrays are indexed by offset from
/// `start`; speeds/positions have horizon+1 entries, controls have horizon.
struct PlanProfile {
  long start = 0;
  int horizon = 0;
  std::vector<double> speeds;
  std::vector<double> positions;
  std::vector<double> tractions;
  std::vector<double> brakes;

  bool covers(long t, int ahead) const {
    return t >= start && t + ahead <= start + horizon;
  }
  double speed_at(long t) const { return speeds.at(static_cast<size_t>(t - start)); }
  double position_at(long t) const { return positions.at(static_cast<size_t>(t - start)); }
};

/// How the reference speed reacts to a light trigger.
enum class RefPolicy {
  Blend,    // ramp toward the band top, capped relative to it
  BandTop,  // constant at the band top (soft-constraint comparison mode)
};

struct PlannerConfig {
  PlannerWeights weights;
  double cruise_ref = 13.3;  // m/s when no light shapes the reference
  int default_horizon = 64;  // K when no light constraint requires more
  int margin = 12;           // rho, steps before plan exhaustion to replan
  bool hard_light_rows = true;
  RefPolicy ref_policy = RefPolicy::Blend;
};

/// Desired speed at step k for a plan starting at k0 over K steps. Implements
/// the blend/ramp schedule for crossing decisions, the ramp to zero for stop
/// decisions, and the constant cruise reference otherwise.
double reference_speed(double cruise, long k, long k0, int K,
                       const ReachabilityDecision* decision, double v_at_k0);

/// Plan horizon: max(mu2, default) at a light trigger, default otherwise.
int plan_horizon(int default_horizon, const std::optional<long>& mu2);

struct TriggerState {
  long last_start = std::numeric_limits<long>::min() / 4;
  int last_horizon = 0;
  int margin = 12;
  std::vector<std::pair<int, double>> pending;  // (light index, trigger threshold)
};

enum class ReplanReason { None, Periodic, Light };

struct TriggerCheck {
  ReplanReason reason = ReplanReason::None;
  int light_index = -1;
};

/// Fire a light trigger the first time the leader reaches a pending threshold
/// (each light at most once); otherwise a periodic replan when the current plan
/// is margin steps from exhaustion. A light trigger wins when both hold.
TriggerCheck should_trigger(TriggerState& state, long t, double leader_position);

/// A light decision bound to its trigger instant, kept while the light is ahead
/// so periodic replans preserve the crossing window.
struct LightContext {
  int light_index = -1;
  double position = 0.0;
  long trigger_step = 0;
  ReachabilityDecision decision;
  std::array<PositionConstraint, 2> constraints;  // absolute step indices
};

struct AssembledPlan {
  QpProblem qp;
  int K = 0;
  long k0 = 0;
  double v0 = 0.0;
  double s0 = 0.0;
  double coordinate_shift = 0.0;  // added to positions so the linearization sees s >= 1
  std::optional<std::pair<long, long>> light_rows;  // stage indices carrying the light bounds
};

/// Assemble the long-term problem at (v0, s0) with reference sequence v_ref
/// (length K+1). When `light` is set its position constraints become hard rows
/// at their stage indices (pulled one stage into the window when it is wide
/// enough, so realized crossings stay green under noise); in soft mode the rows
/// are omitted. Throws std::invalid_argument when a constraint index falls
/// outside [1, K].
AssembledPlan assemble_long_term(long k0, double v0, double s0, const HorizonModel& model,
                                 const PlannerWeights& weights, int K,
                                 const std::optional<LightContext>& light,
                                 const std::vector<double>& v_ref, double v_max,
                                 bool hard_light_rows);

struct PlanResult {
  PlanProfile profile;
  bool solver_ok = false;
  int iterations = 0;
  double residual_norm = 0.0;
  ReplanReason reason = ReplanReason::None;
  std::optional<LightContext> light;  // the decision attached to this plan, if any
};

/// Event-triggered long-term planner for the leader. Owns the trigger state,
/// the active light context, and the warm start.
class Planner {
 public:
  Planner(PlannerConfig config, HorizonModel model, std::vector<TrafficLight> lights,
          SpeedLimits limits, double pass_time, SolverConfig solver);

  /// Call once per step with the measured leader state and the current light
  /// clocks; replans when the trigger condition fires.
  std::optional<PlanResult> maybe_replan(long t, double v_measured, double s_measured,
                                         const std::vector<TrafficLight>& lights_now);

  const PlanProfile& profile() const { return profile_; }
  bool has_plan() const { return profile_.horizon > 0; }
  const TriggerState& trigger_state() const { return trigger_; }

 private:
  PlanResult replan(long t, double v0, double s0, ReplanReason reason, int light_index,
                    const std::vector<TrafficLight>& lights_now);

  PlannerConfig config_;
  HorizonModel model_;
  std::vector<TrafficLight> lights_;
  SpeedLimits limits_;
  double pass_time_;
  SolverConfig solver_;
  TriggerState trigger_;
  std::optional<LightContext> active_light_;
  PlanProfile profile_;
  Eigen::VectorXd warm_;
  int warm_horizon_ = 0;
  long warm_step_ = 0;
};

/// Extract the motion profile from a solved stacked vector.
PlanProfile extract_profile(const Eigen::VectorXd& z, int K, long k0, double v0, double s0,
                            double coordinate_shift);

}  // namespace ecoplatoon
