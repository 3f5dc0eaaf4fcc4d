#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecoplatoon/control.hpp"
#include "ecoplatoon/dynamics.hpp"
#include "ecoplatoon/planner.hpp"
#include "ecoplatoon/signal.hpp"

namespace ecoplatoon {

enum class Mode { Proposed, AccBaseline, SoftConstraint };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);

struct NoiseConfig {
  double speed_std = 0.0;     // m/s
  double position_std = 0.0;  // m
};

struct VehicleSpec {
  VehicleParams params;
  VehicleState initial;
};

struct ScenarioConfig {
  double dt = 0.5;
  long duration = 480;  // steps
  std::uint64_t seed = 1;
  Mode mode = Mode::Proposed;
  bool gravity_mass_scaling = true;

  std::vector<VehicleSpec> vehicles;
  AeroConfig aero;
  RoadProfile road;
  std::vector<TrafficLight> lights;

  double v_min = 8.0;
  double v_max = 16.0;
  double desired_gap = 3.0;   // d_s
  double safe_distance = 1.5; // Delta s

  PlannerConfig planner;
  std::vector<ControllerWeights> controllers;  // one per vehicle
  NoiseConfig noise;
  SolverConfig solver;

  int n_vehicles() const { return static_cast<int>(vehicles.size()); }

  /// Throws std::invalid_argument naming the violated field.
  void validate() const;

  /// The reference scenario: three vehicles, three lights, the piecewise road,
  /// and all weights of the simulation study.
  static ScenarioConfig paper_sec5();

  static ScenarioConfig from_json_file(const std::string& path);
  static ScenarioConfig from_json_text(const std::string& text);
  std::string to_json_text() const;
};

}  // namespace ecoplatoon
