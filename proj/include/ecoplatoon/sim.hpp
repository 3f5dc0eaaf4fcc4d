#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ecoplatoon/scenario.hpp"

namespace ecoplatoon {

struct VehicleRecord {
  double true_speed = 0.0;
  double true_position = 0.0;
  double meas_speed = 0.0;
  double meas_position = 0.0;
  double traction = 0.0;
  double brake = 0.0;
  double fuel_rate = 0.0;   // 1e-6 kg/s
  double fuel_total = 0.0;  // 1e-6 kg, cumulative through this step
  double gap = 0.0;         // to the predecessor; 0 for the leader
};

struct StepRecord {
  long t = 0;
  std::vector<VehicleRecord> vehicles;
};

struct CrossingEvent {
  long step = 0;          // first step at or past the light
  int vehicle = 0;
  int light = 0;
  LightState state = LightState::Red;
  int clock = 0;          // light clock at the crossing step
  double interp_time = 0.0;  // sub-step crossing time, for logging only
};

struct PlanEvent {
  long step = 0;
  ReplanReason reason = ReplanReason::None;
  int light_index = -1;
  bool stop_flag = false;
  CrossingOption option = CrossingOption::Stop;
  bool had_decision = false;
  int horizon = 0;
  int iterations = 0;
  bool converged = true;
};

struct FlagEvent {
  long step = 0;
  int vehicle = -1;
  std::string kind;  // plan_failure, clamp, safety_fallback, control_failure
};

struct Trace {
  std::vector<StepRecord> steps;
  std::vector<CrossingEvent> crossings;
  std::vector<PlanEvent> plans;
  std::vector<FlagEvent> flags;
  std::vector<PlanProfile> plan_profiles;

  double total_fuel(int vehicle) const;
  double platoon_fuel() const;
  double min_gap(int follower) const;
  bool all_crossings_green() const;
  double min_speed() const;
};

/// Run one lockstep scenario: advance triggers/planner, leader then followers in
/// index order, true dynamics, process noise, light clocks. Deterministic for a
/// fixed (config, seed).
Trace run_scenario(const ScenarioConfig& config);

/// Fuel comparison on a lights-removed configuration: proposed vs the ACC
/// baseline over the same seeds.
struct FuelComparison {
  std::vector<std::uint64_t> seeds;
  // cumulative platoon fuel per step, one series per mode
  std::vector<std::vector<double>> proposed;  // [seed][step]
  std::vector<std::vector<double>> acc;
  int proposed_wins = 0;  // seeds where proposed total <= acc total
};
FuelComparison compare_fuel(ScenarioConfig config, const std::vector<std::uint64_t>& seeds);

/// Success for a randomized-timing trial: nobody crossed on red and nobody came
/// to a stop (speed below 0.3 m/s) while underway.
bool trial_success(const Trace& trace);

struct SweepOptions {
  int n_trials = 50;
  int duration_lo = 7;   // seconds, inclusive
  int duration_hi = 22;  // seconds, inclusive
  bool randomize_green = false;  // default randomizes the red duration
  std::uint64_t master_seed = 1;
  long steps = 480;
  bool parallel = true;
};

struct SweepRow {
  double ratio = 0.0;  // gamma_v / gamma_p
  Mode mode = Mode::Proposed;
  int successes = 0;
  int trials = 0;
  double rate() const { return trials > 0 ? static_cast<double>(successes) / trials : 0.0; }
};

/// For each ratio run n_trials with per-light red (or green) durations drawn
/// uniformly from [duration_lo, duration_hi], strict and soft modes sharing the
/// drawn timings and noise seeds. Trials run in parallel unless disabled; the
/// table is identical either way.
std::vector<SweepRow> randomized_light_trial(const ScenarioConfig& base,
                                             const std::vector<double>& ratios,
                                             const SweepOptions& options);

}  // namespace ecoplatoon
