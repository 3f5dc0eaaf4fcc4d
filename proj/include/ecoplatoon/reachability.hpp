#pragma once

#include <array>
#include <optional>

#include "ecoplatoon/signal.hpp"

namespace ecoplatoon {

/// Light timing seen from the trigger instant, converted to seconds so that
/// distance / duration ratios are speeds.
struct LightSnapshot {
  LightState state = LightState::Red;
  double tau = 0.0;    // elapsed cycle time
  double red = 0.0;    // red duration
  double green = 0.0;  // green duration
  double cycle = 0.0;

  static LightSnapshot from(const TrafficLight& light, double dt);
};

struct SpeedLimits {
  double v_min = 0.0;
  double v_max = 0.0;
};

struct ReachabilityInputs {
  double distance = 0.0;      // ell_j, meters from the leader to the light
  double leader_speed = 0.0;  // v_1 at the trigger
  LightSnapshot light;
  SpeedLimits limits;
  double pass_time = 0.0;     // breve tau, seconds the platoon needs to clear the light
  double max_traction = 0.0;  // leader's traction bound, for the adjust acceleration
  double mass = 0.0;          // leader's mass

  void validate() const;
};

struct SpeedBand {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return v >= lo && v <= hi; }
  bool empty() const { return lo > hi; }
};

enum class CrossingOption { FirstWindow, SecondWindow, Stop };

/// Outcome of the reachability check for one upcoming light. For a crossing
/// decision (stop == false) `band` holds the admissible average-speed range and
/// `window` the crossing-time interval as second offsets from the trigger. For a
/// stop decision `window` is the third green window the platoon waits for.
struct ReachabilityDecision {
  bool stop = false;
  CrossingOption option = CrossingOption::Stop;
  std::optional<SpeedBand> band;
  double window_lo = 0.0;
  double window_hi = 0.0;
  std::optional<double> adjust_accel;  // breve a, m/s^2
  std::optional<double> adjust_speed;  // v_diamond, m/s
};

/// Time the whole platoon needs to pass a point: 2 (N-1) d_s / (v_min + v_max),
/// seconds.
double platoon_pass_time(int n_vehicles, double desired_gap, double v_min, double v_max);

/// Leader position at which long-term planning for this light is triggered:
/// p_j - (3/5) c_j v_max with the cycle expressed in seconds.
double trigger_threshold(const TrafficLight& light, double dt, double v_max);

struct SpeedRanges {
  SpeedBand first;   // [q1, q2], q2 = +inf when the light is green
  SpeedBand second;  // [q3, q4]
};

SpeedRanges feasible_speed_ranges(const ReachabilityInputs& in);

ReachabilityDecision classify(const ReachabilityInputs& in);

/// One hard position bound for the long-term plan: s(step) <= bound when
/// pass_by is false, s(step) >= bound when pass_by is true.
struct PositionConstraint {
  long step = 0;
  bool pass_by = false;
  double bound = 0.0;
};

/// The two Eq-style position constraints induced by a decision, mapped onto
/// integer step indices: the not-yet-passed time rounds up, the passed-by time
/// rounds down, so the pair never admits a red-light crossing.
std::array<PositionConstraint, 2> position_constraints(const ReachabilityDecision& decision,
                                                       double light_position, long trigger_step,
                                                       double dt);

}  // namespace ecoplatoon
