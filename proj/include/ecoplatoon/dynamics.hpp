#pragma once

#include <optional>
#include <vector>

namespace ecoplatoon {

/// Coefficients of the polynomial fuel-rate model
///   P(F, v) = [F v] * quad * [F v]^T + lin . [F v] + konst,
/// with P in 1e-6 kg/s.
struct FuelCoeffs {
  double quad[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  double lin[2] = {0.0, 0.0};
  double konst = 0.0;

  /// Coefficients fitted against tire radius r (meters).
  static FuelCoeffs from_tire_radius(double r);

  /// Throws std::invalid_argument if non-finite, asymmetric, or indefinite.
  void validate() const;
};

struct VehicleParams {
  double mass = 0.0;           // kg
  double rolling_coeff = 0.0;  // dimensionless
  double face_area = 0.0;      // m^2
  double max_traction = 0.0;   // N
  double max_brake = 0.0;      // N
  double tire_radius = 0.0;    // m, kept for documentation of the fuel fit
  FuelCoeffs fuel;

  void validate() const;
};

struct AeroConfig {
  double drag_coeff = 0.36;    // c^d
  double air_density = 1.205;  // kg/m^3
  double alpha = 0.414;        // 1/m, gap sensitivity of the platoon drag reduction
  double beta = 41.29;         // dimensionless offset of the drag reduction
  double gravity = 9.81;       // m/s^2

  void validate() const;
};

struct VehicleState {
  double speed = 0.0;     // m/s, >= 0
  double position = 0.0;  // m
};

/// One piece of the piecewise-linear road grade: theta(s) = slope_c0 + slope_c1 * s
/// on [s_lo, s_hi).
struct RoadSegment {
  double s_lo = 0.0;
  double s_hi = 0.0;
  double slope_c0 = 0.0;
  double slope_c1 = 0.0;
};

/// Piecewise road grade covering [0, inf). Segments are contiguous and the last
/// one extends to +inf.
class RoadProfile {
 public:
  RoadProfile() = default;
  explicit RoadProfile(std::vector<RoadSegment> segments);

  double slope_at(double s) const;
  const std::vector<RoadSegment>& segments() const { return segments_; }

  static RoadProfile flat();
  /// The four-piece grade used by the reference scenario (named "paper-sec5"
  /// in scenario configs).
  static RoadProfile paper_sec5();

 private:
  std::vector<RoadSegment> segments_{{0.0, 1e18, 0.0, 0.0}};
};

/// Air drag coefficient xi (kg/m). Pass no gap for the platoon leader; followers
/// get the gap-dependent reduction, clamped so the multiplier never exceeds 1.
/// Throws std::domain_error for gap <= 0 (collision state).
double air_drag_coefficient(const AeroConfig& aero, const VehicleParams& params,
                            std::optional<double> gap);

/// Gravity + rolling resistance at position s (N when mass_scaling, otherwise the
/// literal mass-free form).
double grade_resistance(const AeroConfig& aero, const VehicleParams& params,
                        const RoadProfile& road, double s, bool mass_scaling);

/// Total environment resistance: grade + rolling + aerodynamic drag.
double environment_resistance(const AeroConfig& aero, const VehicleParams& params,
                              const VehicleState& state, const RoadProfile& road,
                              double drag_coeff, bool mass_scaling = true);

struct StepResult {
  VehicleState state;
  bool clamped = false;  // speed would have gone negative and was clamped to 0
};

/// One kinematic step under (traction, brake, env_force). Throws
/// std::invalid_argument if the force bounds are violated.
StepResult step(const VehicleParams& params, const VehicleState& state, double traction,
                double brake, double env_force, double dt);

/// Fuel rate in 1e-6 kg/s for traction F >= 0 and speed v >= 0.
double fuel_rate(const FuelCoeffs& coeffs, double traction, double speed);

}  // namespace ecoplatoon
