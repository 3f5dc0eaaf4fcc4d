#pragma once

#include <utility>

namespace ecoplatoon {

enum class LightState { Red, Green };

/// A traffic light driven by a cycling clock. Durations and the clock count in
/// discrete steps; the light is red while clock is in [0, red_steps] and green on
/// (red_steps, cycle), with the cycle endpoint wrapping back to 0 (red).
struct TrafficLight {
  double position = 0.0;  // m
  int red_steps = 0;      // t^r
  int green_steps = 0;    // t^g
  int clock = 0;          // tau in [0, cycle)

  int cycle() const { return red_steps + green_steps; }
  /// Throws std::invalid_argument on violated invariants.
  void validate() const;
};

/// A green interval in step indices. Endpoints may be fractional once the
/// platoon pass time is subtracted.
struct GreenWindow {
  double start = 0.0;
  double end = 0.0;
};

/// clock' = (clock + 1) mod cycle.
TrafficLight advance_clock(const TrafficLight& light);

LightState light_state(const TrafficLight& light);

/// The two upcoming green windows as seen at step `now`.
std::pair<GreenWindow, GreenWindow> upcoming_green_windows(const TrafficLight& light, long now);

/// Upcoming windows with each end pulled in by the platoon pass time. Throws
/// std::invalid_argument when pass_time is negative or >= green duration (the
/// platoon cannot clear the light within any green phase).
std::pair<GreenWindow, GreenWindow> feasible_green_windows(const TrafficLight& light, long now,
                                                           double pass_time);

}  // namespace ecoplatoon
