#include "ecoplatoon/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace ecoplatoon {

using nlohmann::json;

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Proposed: return "proposed";
    case Mode::AccBaseline: return "acc";
    case Mode::SoftConstraint: return "soft";
  }
  return "proposed";
}

Mode mode_from_string(const std::string& name) {
  if (name == "proposed") return Mode::Proposed;
  if (name == "acc") return Mode::AccBaseline;
  if (name == "soft") return Mode::SoftConstraint;
  throw std::invalid_argument("unknown mode: " + name + " (expected proposed|acc|soft)");
}

namespace {

int seconds_to_steps(double seconds, double dt, const std::string& field) {
  const double steps = seconds / dt;
  const double rounded = std::llround(steps);
  if (std::abs(steps - rounded) > 1e-9)
    throw std::invalid_argument(field + " must be a whole number of steps at dt=" +
                                std::to_string(dt));
  return static_cast<int>(rounded);
}

}  // namespace

void ScenarioConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (duration < 1) throw std::invalid_argument("duration must be >= 1 step");
  if (!(v_min > 0.0 && v_max > v_min))
    throw std::invalid_argument("limits must satisfy 0 < v_min < v_max");
  if (!(safe_distance > 0.0) || !(desired_gap > safe_distance))
    throw std::invalid_argument("gaps must satisfy d_s > delta_s > 0");
  if (vehicles.empty()) throw std::invalid_argument("at least one vehicle is required");
  if (controllers.size() != vehicles.size())
    throw std::invalid_argument("controllers must match vehicles one-to-one");
  aero.validate();
  planner.weights.validate();
  for (size_t i = 0; i < vehicles.size(); ++i) {
    vehicles[i].params.validate();
    if (vehicles[i].initial.speed < 0.0)
      throw std::invalid_argument("vehicle initial speed must be >= 0");
    if (i > 0) {
      const double gap = vehicles[i - 1].initial.position - vehicles[i].initial.position;
      if (!(gap >= safe_distance))
        throw std::invalid_argument("vehicle initial positions must decrease with gaps >= delta_s");
    }
    controllers[i].validate();
  }
  if (vehicles.size() >= 2 &&
      (controllers[1].leader_v != 0.0 || controllers[1].leader_s != 0.0))
    throw std::invalid_argument("vehicle 2's extra leader weights must be zero");
  for (size_t i = 1; i < controllers.size(); ++i)
    if (i >= 2 && controllers[i].horizon > controllers[i - 1].horizon)
      throw std::invalid_argument("follower horizons must be nonincreasing");
  if (!controllers.empty() && controllers[0].horizon > planner.default_horizon / 4)
    throw std::invalid_argument("real-time horizon must satisfy Kbar_1 <= K/4");
  if (planner.margin > planner.default_horizon / 4)
    throw std::invalid_argument("replan margin must satisfy rho <= K/4");
  if (planner.margin < (controllers.empty() ? 1 : controllers[0].horizon))
    throw std::invalid_argument("replan margin must cover the real-time horizon");
  for (const auto& light : lights) light.validate();
}

ScenarioConfig ScenarioConfig::paper_sec5() {
  ScenarioConfig cfg;
  cfg.dt = 0.5;
  cfg.duration = 480;
  cfg.seed = 1;
  cfg.mode = Mode::Proposed;
  cfg.road = RoadProfile::paper_sec5();

  const double masses[3] = {1420.0, 1320.0, 1520.0};
  const double rolling[3] = {0.02, 0.018, 0.022};
  const double areas[3] = {1.7, 1.6, 1.8};
  const double radii[3] = {0.30115, 0.29915, 0.31015};
  const double speeds0[3] = {9.0, 9.0, 9.0};
  const double positions0[3] = {10.0, 7.0, 4.0};
  for (int i = 0; i < 3; ++i) {
    VehicleSpec v;
    v.params.mass = masses[i];
    v.params.rolling_coeff = rolling[i];
    v.params.face_area = areas[i];
    v.params.max_traction = 6.5 * masses[i];
    v.params.max_brake = 4.0 * masses[i];
    v.params.tire_radius = radii[i];
    v.params.fuel = FuelCoeffs::from_tire_radius(radii[i]);
    v.initial = {speeds0[i], positions0[i]};
    cfg.vehicles.push_back(v);
  }

  const double light_positions[3] = {260.0, 580.0, 980.0};
  const int clocks[3] = {0, 3, 49};
  for (int j = 0; j < 3; ++j) {
    TrafficLight light;
    light.position = light_positions[j];
    light.red_steps = seconds_to_steps(20.0, cfg.dt, "red_s");
    light.green_steps = seconds_to_steps(7.0, cfg.dt, "green_s");
    light.clock = clocks[j];
    cfg.lights.push_back(light);
  }

  cfg.planner.weights = {0.4, 0.01, 0.7, 0.001};
  cfg.planner.cruise_ref = 13.3;
  cfg.planner.default_horizon = 64;
  cfg.planner.margin = 12;

  ControllerWeights leader;
  leader.track_v = 2.0;
  leader.track_s = 2.0;
  leader.fuel = 0.1;
  leader.brake = 0.01;
  leader.horizon = 12;
  cfg.controllers.push_back(leader);
  for (int i = 1; i < 3; ++i) {
    ControllerWeights w;
    w.track_v = 6.0;
    w.track_s = 6.0;
    w.fuel = 0.06;
    w.brake = 0.01;
    w.horizon = 12;
    // Vehicle 2's predecessor is the leader, so its duplicate terms vanish;
    // vehicle 3 keeps a mild pull toward the leader.
    w.leader_v = (i == 1) ? 0.0 : 1.0;
    w.leader_s = (i == 1) ? 0.0 : 1.0;
    cfg.controllers.push_back(w);
  }

  cfg.noise = {0.02, 0.02};
  return cfg;
}

namespace {

json road_to_json(const RoadProfile& road) {
  json segs = json::array();
  for (const auto& s : road.segments())
    segs.push_back({{"s_lo", s.s_lo}, {"s_hi", s.s_hi}, {"slope_c0", s.slope_c0},
                    {"slope_c1", s.slope_c1}});
  return {{"segments", segs}};
}

RoadProfile road_from_json(const json& j) {
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    if (name == "paper-sec5") return RoadProfile::paper_sec5();
    if (name == "flat") return RoadProfile::flat();
    throw std::invalid_argument("unknown road preset: " + name);
  }
  std::vector<RoadSegment> segs;
  for (const auto& s : j.at("segments"))
    segs.push_back({s.at("s_lo").get<double>(), s.at("s_hi").get<double>(),
                    s.at("slope_c0").get<double>(), s.at("slope_c1").get<double>()});
  return RoadProfile(segs);
}

}  // namespace

ScenarioConfig ScenarioConfig::from_json_text(const std::string& text) {
  json j = json::parse(text);
  ScenarioConfig cfg;
  if (j.contains("preset")) {
    const std::string preset = j.at("preset").get<std::string>();
    if (preset != "paper-sec5") throw std::invalid_argument("unknown preset: " + preset);
    cfg = paper_sec5();
  }
  if (j.contains("dt")) cfg.dt = j.at("dt").get<double>();
  if (j.contains("duration_steps")) cfg.duration = j.at("duration_steps").get<long>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("mode")) cfg.mode = mode_from_string(j.at("mode").get<std::string>());
  if (j.contains("gravity_mass_scaling"))
    cfg.gravity_mass_scaling = j.at("gravity_mass_scaling").get<bool>();
  if (j.contains("aero")) {
    const auto& a = j.at("aero");
    if (a.contains("drag_coeff")) cfg.aero.drag_coeff = a.at("drag_coeff").get<double>();
    if (a.contains("air_density")) cfg.aero.air_density = a.at("air_density").get<double>();
    if (a.contains("alpha")) cfg.aero.alpha = a.at("alpha").get<double>();
    if (a.contains("beta")) cfg.aero.beta = a.at("beta").get<double>();
    if (a.contains("gravity")) cfg.aero.gravity = a.at("gravity").get<double>();
  }
  if (j.contains("road")) cfg.road = road_from_json(j.at("road"));
  if (j.contains("limits")) {
    cfg.v_min = j.at("limits").at("v_min").get<double>();
    cfg.v_max = j.at("limits").at("v_max").get<double>();
  }
  if (j.contains("gaps")) {
    cfg.desired_gap = j.at("gaps").at("desired").get<double>();
    cfg.safe_distance = j.at("gaps").at("safe").get<double>();
  }
  if (j.contains("noise")) {
    cfg.noise.speed_std = j.at("noise").at("speed_std").get<double>();
    cfg.noise.position_std = j.at("noise").at("position_std").get<double>();
  }
  if (j.contains("vehicles")) {
    cfg.vehicles.clear();
    for (const auto& v : j.at("vehicles")) {
      VehicleSpec spec;
      spec.params.mass = v.at("mass").get<double>();
      spec.params.rolling_coeff = v.at("rolling_coeff").get<double>();
      spec.params.face_area = v.at("face_area").get<double>();
      spec.params.tire_radius = v.at("tire_radius").get<double>();
      spec.params.max_traction = v.contains("max_traction")
                                     ? v.at("max_traction").get<double>()
                                     : 6.5 * spec.params.mass;
      spec.params.max_brake =
          v.contains("max_brake") ? v.at("max_brake").get<double>() : 4.0 * spec.params.mass;
      if (v.contains("fuel")) {
        const auto& f = v.at("fuel");
        spec.params.fuel.quad[0][0] = f.at("o11").get<double>();
        spec.params.fuel.quad[0][1] = f.at("o12").get<double>();
        spec.params.fuel.quad[1][0] = f.at("o12").get<double>();
        spec.params.fuel.quad[1][1] = f.at("o22").get<double>();
        spec.params.fuel.lin[0] = f.at("l1").get<double>();
        spec.params.fuel.lin[1] = f.at("l2").get<double>();
        spec.params.fuel.konst = f.value("konst", 0.0);
      } else {
        spec.params.fuel = FuelCoeffs::from_tire_radius(spec.params.tire_radius);
      }
      spec.initial.speed = v.at("initial").at("speed").get<double>();
      spec.initial.position = v.at("initial").at("position").get<double>();
      cfg.vehicles.push_back(spec);
    }
  }
  if (j.contains("lights")) {
    cfg.lights.clear();
    for (const auto& l : j.at("lights")) {
      TrafficLight light;
      light.position = l.at("position").get<double>();
      light.red_steps = seconds_to_steps(l.at("red_s").get<double>(), cfg.dt, "red_s");
      light.green_steps = seconds_to_steps(l.at("green_s").get<double>(), cfg.dt, "green_s");
      light.clock = seconds_to_steps(l.value("initial_clock_s", 0.0), cfg.dt, "initial_clock_s");
      cfg.lights.push_back(light);
    }
  }
  if (j.contains("planner")) {
    const auto& p = j.at("planner");
    if (p.contains("gamma_p")) cfg.planner.weights.gamma_p = p.at("gamma_p").get<double>();
    if (p.contains("gamma_b")) cfg.planner.weights.gamma_b = p.at("gamma_b").get<double>();
    if (p.contains("gamma_v")) cfg.planner.weights.gamma_v = p.at("gamma_v").get<double>();
    if (p.contains("gamma_s")) cfg.planner.weights.gamma_s = p.at("gamma_s").get<double>();
    if (p.contains("cruise")) cfg.planner.cruise_ref = p.at("cruise").get<double>();
    if (p.contains("default_horizon"))
      cfg.planner.default_horizon = p.at("default_horizon").get<int>();
    if (p.contains("margin")) cfg.planner.margin = p.at("margin").get<int>();
  }
  if (j.contains("controllers")) {
    cfg.controllers.clear();
    for (const auto& c : j.at("controllers")) {
      ControllerWeights w;
      w.track_v = c.at("track_v").get<double>();
      w.track_s = c.at("track_s").get<double>();
      w.fuel = c.at("fuel").get<double>();
      w.brake = c.at("brake").get<double>();
      w.leader_v = c.value("leader_v", 0.0);
      w.leader_s = c.value("leader_s", 0.0);
      w.horizon = c.value("horizon", 12);
      cfg.controllers.push_back(w);
    }
  }
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    if (s.contains("penalty")) cfg.solver.penalty = s.at("penalty").get<double>();
    if (s.contains("tol")) cfg.solver.tol = s.at("tol").get<double>();
    if (s.contains("boundary_frac")) cfg.solver.boundary_frac = s.at("boundary_frac").get<double>();
    if (s.contains("centering")) cfg.solver.centering = s.at("centering").get<double>();
    if (s.contains("max_iter")) cfg.solver.max_iter = s.at("max_iter").get<int>();
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig ScenarioConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string ScenarioConfig::to_json_text() const {
  json j;
  j["dt"] = dt;
  j["duration_steps"] = duration;
  j["seed"] = seed;
  j["mode"] = to_string(mode);
  j["gravity_mass_scaling"] = gravity_mass_scaling;
  j["aero"] = {{"drag_coeff", aero.drag_coeff}, {"air_density", aero.air_density},
               {"alpha", aero.alpha},           {"beta", aero.beta},
               {"gravity", aero.gravity}};
  j["road"] = road_to_json(road);
  j["limits"] = {{"v_min", v_min}, {"v_max", v_max}};
  j["gaps"] = {{"desired", desired_gap}, {"safe", safe_distance}};
  j["noise"] = {{"speed_std", noise.speed_std}, {"position_std", noise.position_std}};
  j["vehicles"] = json::array();
  for (const auto& v : vehicles) {
    j["vehicles"].push_back({{"mass", v.params.mass},
                             {"rolling_coeff", v.params.rolling_coeff},
                             {"face_area", v.params.face_area},
                             {"max_traction", v.params.max_traction},
                             {"max_brake", v.params.max_brake},
                             {"tire_radius", v.params.tire_radius},
                             {"fuel",
                              {{"o11", v.params.fuel.quad[0][0]},
                               {"o12", v.params.fuel.quad[0][1]},
                               {"o22", v.params.fuel.quad[1][1]},
                               {"l1", v.params.fuel.lin[0]},
                               {"l2", v.params.fuel.lin[1]},
                               {"konst", v.params.fuel.konst}}},
                             {"initial",
                              {{"speed", v.initial.speed}, {"position", v.initial.position}}}});
  }
  j["lights"] = json::array();
  for (const auto& l : lights) {
    j["lights"].push_back({{"position", l.position},
                           {"red_s", l.red_steps * dt},
                           {"green_s", l.green_steps * dt},
                           {"initial_clock_s", l.clock * dt}});
  }
  j["planner"] = {{"gamma_p", planner.weights.gamma_p}, {"gamma_b", planner.weights.gamma_b},
                  {"gamma_v", planner.weights.gamma_v}, {"gamma_s", planner.weights.gamma_s},
                  {"cruise", planner.cruise_ref},       {"default_horizon", planner.default_horizon},
                  {"margin", planner.margin}};
  j["controllers"] = json::array();
  for (const auto& c : controllers) {
    j["controllers"].push_back({{"track_v", c.track_v}, {"track_s", c.track_s},
                                {"fuel", c.fuel},       {"brake", c.brake},
                                {"leader_v", c.leader_v}, {"leader_s", c.leader_s},
                                {"horizon", c.horizon}});
  }
  j["solver"] = {{"penalty", solver.penalty},
                 {"tol", solver.tol},
                 {"boundary_frac", solver.boundary_frac},
                 {"centering", solver.centering},
                 {"max_iter", solver.max_iter}};
  return j.dump(2);
}

}  // namespace ecoplatoon
