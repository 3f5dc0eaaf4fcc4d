#include "ecoplatoon/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ecoplatoon {

namespace {

/// splitmix64; used to derive independent per-trial seeds from a master seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

PlanProfile cruise_profile(long t, const VehicleState& measured, double cruise, int horizon,
                           double dt) {
  PlanProfile p;
  p.start = t;
  p.horizon = horizon;
  p.speeds.assign(horizon + 1, cruise);
  p.positions.resize(horizon + 1);
  for (int k = 0; k <= horizon; ++k)
    p.positions[k] = measured.position + cruise * dt * k;
  p.tractions.assign(horizon, 0.0);
  p.brakes.assign(horizon, 0.0);
  return p;
}

}  // namespace

double Trace::total_fuel(int vehicle) const {
  if (steps.empty()) return 0.0;
  return steps.back().vehicles.at(static_cast<size_t>(vehicle)).fuel_total;
}

double Trace::platoon_fuel() const {
  if (steps.empty()) return 0.0;
  double total = 0.0;
  for (const auto& v : steps.back().vehicles) total += v.fuel_total;
  return total;
}

double Trace::min_gap(int follower) const {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& s : steps) lo = std::min(lo, s.vehicles.at(static_cast<size_t>(follower)).gap);
  return lo;
}

bool Trace::all_crossings_green() const {
  for (const auto& c : crossings)
    if (c.state != LightState::Green) return false;
  return true;
}

double Trace::min_speed() const {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& s : steps)
    for (const auto& v : s.vehicles) lo = std::min(lo, v.true_speed);
  return lo;
}

Trace run_scenario(const ScenarioConfig& config) {
  config.validate();
  const int n = config.n_vehicles();
  const double dt = config.dt;

  Trace trace;
  trace.steps.reserve(static_cast<size_t>(config.duration));

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<VehicleState> truth(n), measured(n);
  for (int i = 0; i < n; ++i) truth[i] = measured[i] = config.vehicles[i].initial;

  std::vector<TrafficLight> lights = config.lights;
  std::vector<double> fuel_total(n, 0.0);
  std::vector<std::vector<bool>> crossed(n, std::vector<bool>(lights.size(), false));

  // Per-vehicle horizon models; pointers refer into the config copy we hold.
  std::vector<HorizonModel> models(n);
  for (int i = 0; i < n; ++i) {
    HorizonModel& m = models[i];
    m.dt = dt;
    m.mass = config.vehicles[i].params.mass;
    m.road = &config.road;
    m.params = &config.vehicles[i].params;
    m.aero = &config.aero;
    m.gravity_mass_scaling = config.gravity_mass_scaling;
    if (i == 0) {
      const double xi = air_drag_coefficient(config.aero, config.vehicles[i].params, std::nullopt);
      m.drag_coeff = [xi](int, double) { return xi; };
    }
    // Followers get a per-step closure over the predecessor prediction inside
    // the controller; this default only backs planner-style uses.
  }

  PlannerConfig planner_cfg = config.planner;
  if (config.mode == Mode::SoftConstraint) {
    planner_cfg.hard_light_rows = false;
    planner_cfg.ref_policy = RefPolicy::BandTop;
  }
  const double pass_time =
      platoon_pass_time(n, config.desired_gap, config.v_min, config.v_max);
  std::optional<Planner> planner;
  if (config.mode != Mode::AccBaseline)
    planner.emplace(planner_cfg, models[0], lights, SpeedLimits{config.v_min, config.v_max},
                    pass_time, config.solver);

  // The ACC baseline keeps the same controller structure: the leader cruises
  // (no position tracking) and followers track only the predecessor speed plus
  // the hard safety bound.
  std::vector<ControllerWeights> weights = config.controllers;
  if (config.mode == Mode::AccBaseline) {
    weights[0].track_s = 0.0;
    for (int i = 1; i < n; ++i) {
      weights[static_cast<size_t>(i)].track_s = 0.0;
      weights[static_cast<size_t>(i)].leader_v = 0.0;
      weights[static_cast<size_t>(i)].leader_s = 0.0;
    }
  }
  LeaderController leader(weights[0], models[0], config.v_max, config.solver);
  std::vector<FollowerController> followers;
  for (int i = 1; i < n; ++i)
    followers.emplace_back(i, weights[static_cast<size_t>(i)], models[i], config.v_max,
                           config.desired_gap, config.safe_distance, config.solver);

  for (long t = 0; t < config.duration; ++t) {
    // Long-term planning (event-triggered).
    if (planner) {
      auto result = planner->maybe_replan(t, measured[0].speed, measured[0].position, lights);
      if (result) {
        PlanEvent ev;
        ev.step = t;
        ev.reason = result->reason;
        ev.horizon = result->profile.horizon;
        ev.iterations = result->iterations;
        ev.converged = result->solver_ok;
        if (result->light) {
          ev.light_index = result->light->light_index;
          ev.had_decision = true;
          ev.stop_flag = result->light->decision.stop;
          ev.option = result->light->decision.option;
        }
        trace.plans.push_back(ev);
        if (result->solver_ok)
          trace.plan_profiles.push_back(result->profile);
        else
          trace.flags.push_back({t, 0, "plan_failure"});
      }
    }

    // Real-time layer: leader first, then followers in index order so each has
    // the current-step message of its predecessor.
    std::vector<ControlOutput> outputs(n);
    if (planner) {
      outputs[0] = leader.step(t, measured[0], planner->profile());
    } else {
      // ACC baseline: track a constant cruise reference; position tracking off.
      PlanProfile cruise = cruise_profile(t, measured[0], config.planner.cruise_ref,
                                          config.controllers[0].horizon, dt);
      outputs[0] = leader.step(t, measured[0], cruise);
    }
    if (!outputs[0].solver_ok) trace.flags.push_back({t, 0, "control_failure"});
    for (int i = 1; i < n; ++i) {
      outputs[i] = followers[static_cast<size_t>(i - 1)].step(t, measured[i], outputs[0].message,
                                                              outputs[i - 1].message);
      if (!outputs[i].solver_ok)
        trace.flags.push_back({t, i, outputs[i].safety_fallback ? "safety_fallback"
                                                                : "control_failure"});
    }

    // Record the step, then advance the true dynamics.
    StepRecord rec;
    rec.t = t;
    rec.vehicles.resize(n);
    std::vector<VehicleState> next(n);
    for (int i = 0; i < n; ++i) {
      std::optional<double> gap;
      if (i > 0) gap = truth[i - 1].position - truth[i].position;
      const double xi = air_drag_coefficient(config.aero, config.vehicles[i].params, gap);
      const double env = environment_resistance(config.aero, config.vehicles[i].params, truth[i],
                                                config.road, xi, config.gravity_mass_scaling);
      const double rate = fuel_rate(config.vehicles[i].params.fuel, outputs[i].traction,
                                    truth[i].speed);
      fuel_total[i] += rate * dt;

      VehicleRecord& vr = rec.vehicles[static_cast<size_t>(i)];
      vr.true_speed = truth[i].speed;
      vr.true_position = truth[i].position;
      vr.meas_speed = measured[i].speed;
      vr.meas_position = measured[i].position;
      vr.traction = outputs[i].traction;
      vr.brake = outputs[i].brake;
      vr.fuel_rate = rate;
      vr.fuel_total = fuel_total[i];
      vr.gap = gap.value_or(0.0);

      const StepResult stepped = step(config.vehicles[i].params, truth[i], outputs[i].traction,
                                      outputs[i].brake, env, dt);
      next[i] = stepped.state;
      if (stepped.clamped) trace.flags.push_back({t, i, "clamp"});
    }
    trace.steps.push_back(std::move(rec));

    // Process noise on the true state; the controllers see it next step.
    for (int i = 0; i < n; ++i) {
      next[i].speed += config.noise.speed_std * gauss(rng);
      next[i].position += config.noise.position_std * gauss(rng);
      if (next[i].speed < 0.0) next[i].speed = 0.0;
    }

    // Advance the light clocks to t+1, then detect crossings at t+1.
    for (auto& light : lights) light = advance_clock(light);
    for (int i = 0; i < n; ++i) {
      for (size_t jl = 0; jl < lights.size(); ++jl) {
        if (crossed[i][jl]) continue;
        const double p = lights[jl].position;
        if (truth[i].position < p && next[i].position >= p) {
          CrossingEvent ev;
          ev.step = t + 1;
          ev.vehicle = i;
          ev.light = static_cast<int>(jl);
          ev.state = light_state(lights[jl]);
          ev.clock = lights[jl].clock;
          const double frac = (p - truth[i].position) /
                              std::max(next[i].position - truth[i].position, 1e-9);
          ev.interp_time = static_cast<double>(t) + frac;
          trace.crossings.push_back(ev);
          crossed[i][jl] = true;
        }
      }
      truth[i] = next[i];
      measured[i] = next[i];
    }
  }
  return trace;
}

FuelComparison compare_fuel(ScenarioConfig config, const std::vector<std::uint64_t>& seeds) {
  config.lights.clear();  // the benchmark road carries no traffic lights
  FuelComparison out;
  out.seeds = seeds;
  out.proposed.resize(seeds.size());
  out.acc.resize(seeds.size());
  for (size_t i = 0; i < seeds.size(); ++i) {
    ScenarioConfig proposed = config;
    proposed.mode = Mode::Proposed;
    proposed.seed = seeds[i];
    ScenarioConfig acc = config;
    acc.mode = Mode::AccBaseline;
    acc.seed = seeds[i];
    const Trace tp = run_scenario(proposed);
    const Trace ta = run_scenario(acc);
    auto series = [](const Trace& tr) {
      std::vector<double> s(tr.steps.size(), 0.0);
      for (size_t k = 0; k < tr.steps.size(); ++k) {
        double total = 0.0;
        for (const auto& v : tr.steps[k].vehicles) total += v.fuel_total;
        s[k] = total;
      }
      return s;
    };
    out.proposed[i] = series(tp);
    out.acc[i] = series(ta);
    if (!out.proposed[i].empty() && out.proposed[i].back() <= out.acc[i].back())
      ++out.proposed_wins;
  }
  return out;
}

bool trial_success(const Trace& trace) {
  for (const auto& c : trace.crossings)
    if (c.state != LightState::Green) return false;
  for (const auto& s : trace.steps)
    for (const auto& v : s.vehicles)
      if (v.true_speed < 0.3) return false;
  return true;
}

std::vector<SweepRow> randomized_light_trial(const ScenarioConfig& base,
                                             const std::vector<double>& ratios,
                                             const SweepOptions& options) {
  if (options.n_trials < 1) throw std::invalid_argument("n_trials must be >= 1");
  if (options.duration_lo > options.duration_hi || options.duration_lo < 1)
    throw std::invalid_argument("invalid duration range");

  std::vector<SweepRow> table;
  for (double ratio : ratios) {
    if (!(ratio > 0.0)) throw std::invalid_argument("gamma ratios must be positive");
    table.push_back({ratio, Mode::Proposed, 0, options.n_trials});
    table.push_back({ratio, Mode::SoftConstraint, 0, options.n_trials});
  }

  for (size_t r = 0; r < ratios.size(); ++r) {
    std::vector<int> strict_ok(options.n_trials, 0), soft_ok(options.n_trials, 0);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (options.parallel)
#endif
    for (int trial = 0; trial < options.n_trials; ++trial) {
      const std::uint64_t trial_seed = mix_seed(options.master_seed, trial);
      std::mt19937_64 timing_rng(mix_seed(trial_seed, 1));
      std::uniform_int_distribution<int> draw(options.duration_lo, options.duration_hi);

      ScenarioConfig cfg = base;
      cfg.duration = options.steps;
      cfg.seed = mix_seed(trial_seed, 2);
      cfg.planner.weights.gamma_v = ratios[r] * cfg.planner.weights.gamma_p;
      for (auto& light : cfg.lights) {
        const int seconds = draw(timing_rng);
        const int steps = static_cast<int>(std::llround(seconds / cfg.dt));
        if (options.randomize_green)
          light.green_steps = steps;
        else
          light.red_steps = steps;
        light.clock = light.clock % light.cycle();
      }

      ScenarioConfig strict = cfg;
      strict.mode = Mode::Proposed;
      ScenarioConfig soft = cfg;
      soft.mode = Mode::SoftConstraint;
      strict_ok[trial] = trial_success(run_scenario(strict)) ? 1 : 0;
      soft_ok[trial] = trial_success(run_scenario(soft)) ? 1 : 0;
    }

    int strict_total = 0, soft_total = 0;
    for (int trial = 0; trial < options.n_trials; ++trial) {
      strict_total += strict_ok[trial];
      soft_total += soft_ok[trial];
    }
    table[2 * r].successes = strict_total;
    table[2 * r + 1].successes = soft_total;
  }
  return table;
}

}  // namespace ecoplatoon
