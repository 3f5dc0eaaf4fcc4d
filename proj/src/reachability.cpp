#include "ecoplatoon/reachability.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ecoplatoon {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SpeedBand intersect(const SpeedBand& a, const SpeedBand& b) {
  return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
}

/// Solve the constant-acceleration-then-cruise equation for the cruise speed.
/// Rearranged it is the quadratic
///   v^2 - 2 (a t + v1) v + (v1^2 + 2 a ell) = 0.
/// Returns the root whose adjust time (v - v1)/a lies in [0, t] on the correct
/// side of v1, preferring the one nearer v1 when both qualify.
std::optional<double> solve_adjust_speed(double v1, double accel, double t_limit, double ell) {
  const double b_half = accel * t_limit + v1;
  const double disc = b_half * b_half - (v1 * v1 + 2.0 * accel * ell);
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  const double roots[2] = {b_half - sq, b_half + sq};
  std::optional<double> best;
  for (double v : roots) {
    const double adjust_time = (v - v1) / accel;
    if (adjust_time < -1e-9 || adjust_time > t_limit + 1e-9) continue;
    if (accel > 0.0 && v < v1 - 1e-9) continue;
    if (accel < 0.0 && v > v1 + 1e-9) continue;
    if (!best || std::abs(v - v1) < std::abs(*best - v1)) best = v;
  }
  return best;
}

}  // namespace

LightSnapshot LightSnapshot::from(const TrafficLight& light, double dt) {
  LightSnapshot s;
  s.state = light_state(light);
  s.tau = light.clock * dt;
  s.red = light.red_steps * dt;
  s.green = light.green_steps * dt;
  s.cycle = light.cycle() * dt;
  return s;
}

void ReachabilityInputs::validate() const {
  if (!(distance > 0.0)) throw std::invalid_argument("distance to light must be positive");
  if (!(limits.v_min > 0.0) || !(limits.v_max > limits.v_min))
    throw std::invalid_argument("speed limits must satisfy 0 < v_min < v_max");
  if (pass_time < 0.0) throw std::invalid_argument("pass time must be nonnegative");
}

double platoon_pass_time(int n_vehicles, double desired_gap, double v_min, double v_max) {
  if (n_vehicles < 1) throw std::invalid_argument("platoon needs at least one vehicle");
  if (!(desired_gap > 0.0)) throw std::invalid_argument("desired gap must be positive");
  return 2.0 * (n_vehicles - 1) * desired_gap / (v_min + v_max);
}

double trigger_threshold(const TrafficLight& light, double dt, double v_max) {
  return light.position - (3.0 / 5.0) * light.cycle() * dt * v_max;
}

SpeedRanges feasible_speed_ranges(const ReachabilityInputs& in) {
  in.validate();
  const auto& l = in.light;
  const double ell = in.distance;

  SpeedRanges out;
  const double first_end = l.cycle - l.tau - in.pass_time;
  out.first.lo = first_end > 0.0 ? ell / first_end : kInf;
  if (l.state == LightState::Red) {
    const double head = l.red - l.tau;
    if (head < 0.0)
      throw std::logic_error("red light with clock past the red duration");
    out.first.hi = head > 0.0 ? ell / head : kInf;
  } else {
    out.first.hi = kInf;
  }
  out.second.lo = ell / (2.0 * l.cycle - l.tau - in.pass_time);
  out.second.hi = ell / (l.red - l.tau + l.cycle);
  return out;
}

ReachabilityDecision classify(const ReachabilityInputs& in) {
  const SpeedRanges q = feasible_speed_ranges(in);
  const SpeedBand limits{in.limits.v_min, in.limits.v_max};
  const SpeedBand band1 = intersect(q.first, limits);
  const SpeedBand band2 = intersect(q.second, limits);

  ReachabilityDecision out;
  const auto stop_decision = [&] {
    ReachabilityDecision d;
    d.stop = true;
    d.option = CrossingOption::Stop;
    // Wait for the third green window.
    d.window_lo = 2.0 * in.light.cycle + in.light.red - in.light.tau;
    d.window_hi = 3.0 * in.light.cycle - in.light.tau - in.pass_time;
    return d;
  };

  if (band1.empty() && band2.empty()) return stop_decision();

  // Strategy: the first window has priority whenever its speed range meets the
  // road limits at all.
  const bool use_first = !band1.empty();
  const SpeedBand band = use_first ? band1 : band2;
  out.option = use_first ? CrossingOption::FirstWindow : CrossingOption::SecondWindow;
  out.band = band;
  out.window_lo = in.distance / band.hi;
  out.window_hi = in.distance / band.lo;

  if (band.contains(in.leader_speed)) {
    out.stop = false;
    return out;
  }

  // Adjust with constant acceleration to a cruise speed, then hold it. The
  // target arrival is the far window edge on the side the leader approaches
  // from.
  const double accel_mag = 3.0 * in.max_traction / (5.0 * in.mass);
  const bool accelerate = in.leader_speed < band.lo;
  const double accel = accelerate ? accel_mag : -accel_mag;
  const double t_limit = accelerate ? in.distance / band.lo : in.distance / band.hi;
  const auto v_adjust = solve_adjust_speed(in.leader_speed, accel, t_limit, in.distance);
  out.adjust_accel = accel;
  if (v_adjust && *v_adjust >= in.limits.v_min && *v_adjust <= in.limits.v_max) {
    out.adjust_speed = v_adjust;
    out.stop = false;
    return out;
  }

  ReachabilityDecision d = stop_decision();
  d.adjust_accel = accel;
  if (v_adjust) d.adjust_speed = v_adjust;
  return d;
}

std::array<PositionConstraint, 2> position_constraints(const ReachabilityDecision& decision,
                                                       double light_position, long trigger_step,
                                                       double dt) {
  long lo = static_cast<long>(std::ceil(decision.window_lo / dt - 1e-9));
  long hi = static_cast<long>(std::floor(decision.window_hi / dt + 1e-9));
  if (lo > hi) {
    // Sub-step window; pin both constraints to the nearest step.
    lo = hi = static_cast<long>(std::llround(0.5 * (decision.window_lo + decision.window_hi) / dt));
  }
  return {PositionConstraint{trigger_step + lo, false, light_position},
          PositionConstraint{trigger_step + hi, true, light_position}};
}

}  // namespace ecoplatoon
