#include "ecoplatoon/signal.hpp"

#include <stdexcept>

namespace ecoplatoon {

void TrafficLight::validate() const {
  if (!(red_steps > 0)) throw std::invalid_argument("light red duration must be > 0");
  if (!(green_steps > 0)) throw std::invalid_argument("light green duration must be > 0");
  if (clock < 0 || clock >= cycle())
    throw std::invalid_argument("light clock must lie in [0, cycle)");
}

TrafficLight advance_clock(const TrafficLight& light) {
  TrafficLight out = light;
  out.clock = (light.clock + 1) % light.cycle();
  return out;
}

LightState light_state(const TrafficLight& light) {
  return light.clock <= light.red_steps ? LightState::Red : LightState::Green;
}

std::pair<GreenWindow, GreenWindow> upcoming_green_windows(const TrafficLight& light, long now) {
  const double tau = light.clock;
  const double tr = light.red_steps;
  const double c = light.cycle();
  if (light_state(light) == LightState::Red) {
    return {{now + tr - tau, now - tau + c}, {now + tr - tau + c, now - tau + 2 * c}};
  }
  return {{static_cast<double>(now), now - tau + c}, {now + tr - tau + c, now - tau + 2 * c}};
}

std::pair<GreenWindow, GreenWindow> feasible_green_windows(const TrafficLight& light, long now,
                                                           double pass_time) {
  if (pass_time < 0.0) throw std::invalid_argument("pass time must be nonnegative");
  if (pass_time >= light.green_steps)
    throw std::invalid_argument("platoon pass time exceeds the green duration");
  auto [first, second] = upcoming_green_windows(light, now);
  first.end -= pass_time;
  second.end -= pass_time;
  return {first, second};
}

}  // namespace ecoplatoon
