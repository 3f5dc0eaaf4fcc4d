#include <stdexcept>

#include "doctest.h"
#include "ecoplatoon/signal.hpp"

using namespace ecoplatoon;

namespace {

TrafficLight sec5_light(int clock) {
  TrafficLight l;
  l.position = 260.0;
  l.red_steps = 20;
  l.green_steps = 7;
  l.clock = clock;
  return l;
}

}  // namespace

TEST_CASE("clock advance wraps modulo the cycle") {
  CHECK(advance_clock(sec5_light(26)).clock == 0);
  CHECK(advance_clock(sec5_light(0)).clock == 1);
  CHECK(advance_clock(sec5_light(19)).clock == 20);
}

TEST_CASE("light state boundaries") {
  CHECK(light_state(sec5_light(20)) == LightState::Red);  // closed upper endpoint
  CHECK(light_state(sec5_light(21)) == LightState::Green);
  CHECK(light_state(sec5_light(0)) == LightState::Red);
  CHECK(light_state(sec5_light(26)) == LightState::Green);
}

TEST_CASE("upcoming green windows") {
  SUBCASE("red phase") {
    const auto [w1, w2] = upcoming_green_windows(sec5_light(10), 100);
    CHECK(w1.start == doctest::Approx(110.0));
    CHECK(w1.end == doctest::Approx(117.0));
    CHECK(w2.start == doctest::Approx(137.0));
    CHECK(w2.end == doctest::Approx(144.0));
  }
  SUBCASE("green phase starts now") {
    const auto [w1, w2] = upcoming_green_windows(sec5_light(25), 100);
    CHECK(w1.start == doctest::Approx(100.0));
    CHECK(w1.end == doctest::Approx(102.0));
    CHECK(w2.start == doctest::Approx(122.0));
    CHECK(w2.end == doctest::Approx(129.0));
  }
  SUBCASE("fresh red cycle at time zero") {
    const auto [w1, w2] = upcoming_green_windows(sec5_light(0), 0);
    CHECK(w1.start == doctest::Approx(20.0));
    CHECK(w1.end == doctest::Approx(27.0));
    CHECK(w2.start == doctest::Approx(47.0));
    CHECK(w2.end == doctest::Approx(54.0));
  }
}

TEST_CASE("feasible windows shrink the tail by the pass time") {
  SUBCASE("red phase") {
    const auto [w1, w2] = feasible_green_windows(sec5_light(10), 100, 0.5);
    CHECK(w1.start == doctest::Approx(110.0));
    CHECK(w1.end == doctest::Approx(116.5));
    CHECK(w2.start == doctest::Approx(137.0));
    CHECK(w2.end == doctest::Approx(143.5));
  }
  SUBCASE("zero pass time leaves the raw windows") {
    const auto raw = upcoming_green_windows(sec5_light(13), 42);
    const auto fz = feasible_green_windows(sec5_light(13), 42, 0.0);
    CHECK(fz.first.start == raw.first.start);
    CHECK(fz.first.end == raw.first.end);
    CHECK(fz.second.end == raw.second.end);
  }
  SUBCASE("green phase") {
    const auto [w1, w2] = feasible_green_windows(sec5_light(21), 0, 0.5);
    CHECK(w1.start == doctest::Approx(0.0));
    CHECK(w1.end == doctest::Approx(5.5));
    CHECK(w2.start == doctest::Approx(26.0));
    CHECK(w2.end == doctest::Approx(32.5));
  }
  SUBCASE("pass time must fit inside a green phase") {
    CHECK_THROWS_AS(feasible_green_windows(sec5_light(0), 0, 7.0), std::invalid_argument);
    CHECK_THROWS_AS(feasible_green_windows(sec5_light(0), 0, -0.1), std::invalid_argument);
  }
}

TEST_CASE("window pairs are ordered and nested, and interiors are green") {
  // Exhaustive over all timings with cycle <= 40 and every clock phase.
  for (int red = 1; red <= 20; ++red) {
    for (int green = 1; green <= 20; ++green) {
      if (red + green > 40) continue;
      const double pass = 0.25 * green;
      for (int tau = 0; tau < red + green; ++tau) {
        TrafficLight light;
        light.red_steps = red;
        light.green_steps = green;
        light.clock = tau;
        const long now = 1000;
        const auto raw = upcoming_green_windows(light, now);
        const auto fz = feasible_green_windows(light, now, pass);
        REQUIRE(fz.first.end < fz.second.start);
        REQUIRE(fz.first.start >= raw.first.start);
        REQUIRE(fz.first.end <= raw.first.end);
        REQUIRE(fz.second.start >= raw.second.start);
        REQUIRE(fz.second.end <= raw.second.end);

        // Step the clock forward; every integer instant strictly inside a raw
        // window must be green.
        TrafficLight walk = light;
        for (long t = now; t <= static_cast<long>(raw.second.end) + 1; ++t) {
          const bool inside_first = t > raw.first.start && t < raw.first.end;
          const bool inside_second = t > raw.second.start && t < raw.second.end;
          if (inside_first || inside_second)
            REQUIRE(light_state(walk) == LightState::Green);
          walk = advance_clock(walk);
        }
      }
    }
  }
}

TEST_CASE("light validation") {
  TrafficLight l = sec5_light(0);
  CHECK_NOTHROW(l.validate());
  l.clock = 27;
  CHECK_THROWS_AS(l.validate(), std::invalid_argument);
  l.clock = 0;
  l.green_steps = 0;
  CHECK_THROWS_AS(l.validate(), std::invalid_argument);
}
