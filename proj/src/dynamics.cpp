#include "ecoplatoon/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace ecoplatoon {

namespace {

bool finite(double x) { return std::isfinite(x); }

}  // namespace

FuelCoeffs FuelCoeffs::from_tire_radius(double r) {
  if (r <= 0.0) throw std::invalid_argument("tire radius must be positive");
  FuelCoeffs f;
  f.quad[0][0] = 1.8085e-4 / r;
  f.quad[0][1] = 8.6815e-6 / r;
  f.quad[1][0] = 8.6815e-6 / r;
  f.quad[1][1] = 5.4479e-6 / (r * r);
  f.lin[0] = 0.0;
  f.lin[1] = 1.1046e-2 / r;
  f.konst = 0.0;
  return f;
}

void FuelCoeffs::validate() const {
  for (int i = 0; i < 2; ++i) {
    if (!finite(lin[i])) throw std::invalid_argument("fuel lin coefficient not finite");
    for (int j = 0; j < 2; ++j)
      if (!finite(quad[i][j])) throw std::invalid_argument("fuel quad coefficient not finite");
  }
  if (!finite(konst)) throw std::invalid_argument("fuel constant not finite");
  if (std::abs(quad[0][1] - quad[1][0]) > 1e-12 * (1.0 + std::abs(quad[0][1])))
    throw std::invalid_argument("fuel quad matrix must be symmetric");
  // PSD for a symmetric 2x2: nonnegative diagonal and determinant.
  const double det = quad[0][0] * quad[1][1] - quad[0][1] * quad[1][0];
  if (quad[0][0] < -1e-15 || quad[1][1] < -1e-15 || det < -1e-15)
    throw std::invalid_argument("fuel quad matrix must be positive semidefinite");
}

void VehicleParams::validate() const {
  if (!(mass > 0.0)) throw std::invalid_argument("mass must be > 0");
  if (!(face_area > 0.0)) throw std::invalid_argument("face_area must be > 0");
  if (!(max_traction > 0.0)) throw std::invalid_argument("max_traction must be > 0");
  if (!(max_brake > 0.0)) throw std::invalid_argument("max_brake must be > 0");
  if (!(rolling_coeff >= 0.0 && rolling_coeff <= 0.1))
    throw std::invalid_argument("rolling_coeff must be in [0, 0.1]");
  fuel.validate();
}

void AeroConfig::validate() const {
  if (!(drag_coeff > 0.0) || !(air_density > 0.0) || !(alpha > 0.0) || !(beta > 0.0) ||
      !(gravity > 0.0))
    throw std::invalid_argument("aero parameters must be positive");
}

RoadProfile::RoadProfile(std::vector<RoadSegment> segments) : segments_(std::move(segments)) {
  if (segments_.empty()) throw std::invalid_argument("road profile needs at least one segment");
  if (segments_.front().s_lo != 0.0)
    throw std::invalid_argument("road profile must start at s = 0");
  for (size_t i = 0; i + 1 < segments_.size(); ++i) {
    if (segments_[i].s_hi != segments_[i + 1].s_lo)
      throw std::invalid_argument("road segments must be contiguous");
    if (!(segments_[i].s_hi > segments_[i].s_lo))
      throw std::invalid_argument("road segment must have positive length");
  }
  if (segments_.back().s_hi < 1e17)
    throw std::invalid_argument("last road segment must extend to +inf");
}

double RoadProfile::slope_at(double s) const {
  if (s < 0.0) s = 0.0;
  for (const auto& seg : segments_) {
    if (s >= seg.s_lo && s < seg.s_hi) return seg.slope_c0 + seg.slope_c1 * s;
  }
  const auto& last = segments_.back();
  return last.slope_c0 + last.slope_c1 * s;
}

RoadProfile RoadProfile::flat() { return RoadProfile({{0.0, 1e18, 0.0, 0.0}}); }

RoadProfile RoadProfile::paper_sec5() {
  return RoadProfile({
      {0.0, 200.0, 1.0 / 100.0, -1.0 / 10000.0},
      {200.0, 300.0, -1.0 / 10.0, 1.0 / 2500.0},
      {300.0, 500.0, 2.0 / 25.0, -1.0 / 5000.0},
      {500.0, 1e18, 0.1, 0.0},
  });
}

double air_drag_coefficient(const AeroConfig& aero, const VehicleParams& params,
                            std::optional<double> gap) {
  const double base = 0.5 * aero.drag_coeff * aero.air_density * params.face_area;
  if (!gap) return base;
  if (!(*gap > 0.0)) throw std::domain_error("air drag gap must be positive");
  const double multiplier = std::min(1.0, 1.0 + (aero.alpha * *gap - aero.beta) / 100.0);
  return base * multiplier;
}

double grade_resistance(const AeroConfig& aero, const VehicleParams& params,
                        const RoadProfile& road, double s, bool mass_scaling) {
  const double theta = road.slope_at(s);
  const double scale = mass_scaling ? params.mass : 1.0;
  return scale * aero.gravity * std::sin(theta) +
         scale * aero.gravity * params.rolling_coeff * std::cos(theta);
}

double environment_resistance(const AeroConfig& aero, const VehicleParams& params,
                              const VehicleState& state, const RoadProfile& road,
                              double drag_coeff, bool mass_scaling) {
  return grade_resistance(aero, params, road, state.position, mass_scaling) +
         drag_coeff * state.speed * state.speed;
}

StepResult step(const VehicleParams& params, const VehicleState& state, double traction,
                double brake, double env_force, double dt) {
  const double tol_t = 1e-6 * std::max(1.0, params.max_traction);
  const double tol_b = 1e-6 * std::max(1.0, params.max_brake);
  if (traction < -tol_t || traction > params.max_traction + tol_t)
    throw std::invalid_argument("traction out of bounds: " + std::to_string(traction));
  if (brake < -tol_b || brake > params.max_brake + tol_b)
    throw std::invalid_argument("brake out of bounds: " + std::to_string(brake));
  traction = std::clamp(traction, 0.0, params.max_traction);
  brake = std::clamp(brake, 0.0, params.max_brake);

  const double a = (traction - brake - env_force) / params.mass;
  StepResult out;
  out.state.speed = state.speed + a * dt;
  out.state.position = state.position + state.speed * dt + 0.5 * a * dt * dt;
  if (out.state.speed < 0.0) {
    // Speed cannot go negative; stop within the step instead of rolling back.
    const double t_stop = state.speed / std::max(-a, 1e-12);
    out.state.speed = 0.0;
    out.state.position = state.position + state.speed * t_stop - 0.5 * (-a) * t_stop * t_stop;
    out.clamped = true;
  }
  return out;
}

double fuel_rate(const FuelCoeffs& c, double traction, double speed) {
  const double f = traction;
  const double v = speed;
  return c.quad[0][0] * f * f + (c.quad[0][1] + c.quad[1][0]) * f * v + c.quad[1][1] * v * v +
         c.lin[0] * f + c.lin[1] * v + c.konst;
}

}  // namespace ecoplatoon
