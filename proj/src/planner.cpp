#include "ecoplatoon/planner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ecoplatoon {

void PlannerWeights::validate() const {
  if (!(gamma_p > 0.0)) throw std::invalid_argument("gamma_p must be > 0");
  if (gamma_b < 0.0 || gamma_v < 0.0 || gamma_s < 0.0)
    throw std::invalid_argument("planner weights must be nonnegative");
}

double reference_speed(double cruise, long k, long k0, int K,
                       const ReachabilityDecision* decision, double v0) {
  if (!decision) return cruise;
  const double progress = static_cast<double>(k - k0);
  if (decision->stop) return v0 - (v0 / K) * progress;
  const SpeedBand band = *decision->band;
  const double ramp = v0 + progress * (band.hi - v0) / K;
  if (v0 < band.lo) return std::min(ramp, band.hi - 1.0);
  if (v0 > band.hi) return std::max(ramp, band.hi - 3.0);
  return std::max(ramp, band.hi - 1.0);
}

int plan_horizon(int default_horizon, const std::optional<long>& mu2) {
  if (!mu2) return default_horizon;
  return std::max(static_cast<int>(*mu2), default_horizon);
}

TriggerCheck should_trigger(TriggerState& state, long t, double leader_position) {
  for (auto it = state.pending.begin(); it != state.pending.end(); ++it) {
    if (leader_position >= it->second) {
      TriggerCheck check{ReplanReason::Light, it->first};
      state.pending.erase(it);
      return check;
    }
  }
  if (t >= state.last_start + state.last_horizon - state.margin)
    return {ReplanReason::Periodic, -1};
  return {ReplanReason::None, -1};
}

AssembledPlan assemble_long_term(long k0, double v0, double s0, const HorizonModel& model,
                                 const PlannerWeights& weights, int K,
                                 const std::optional<LightContext>& light,
                                 const std::vector<double>& v_ref, double v_max,
                                 bool hard_light_rows) {
  weights.validate();
  if (v_ref.size() != static_cast<size_t>(K) + 1)
    throw std::invalid_argument("v_ref must have K+1 entries");

  AssembledPlan out;
  out.K = K;
  out.k0 = k0;
  out.v0 = v0;
  out.s0 = s0;
  // The linearization divides by the iterate position; shift coordinates so the
  // plan starts at s >= 1.
  if (s0 < 1.0) out.coordinate_shift = 1.0 - s0;
  const double s0_shifted = s0 + out.coordinate_shift;
  const double dt = model.dt;

  HorizonCost cost;
  cost.fuel_weight = weights.gamma_p;
  cost.brake_weight = weights.gamma_b;
  cost.quad_v = weights.gamma_v;
  cost.quad_s = weights.gamma_s;
  cost.lin_v.assign(K + 1, 0.0);
  cost.lin_s.assign(K + 1, 0.0);
  for (int k = 1; k <= K; ++k) {
    const double s_star = s0_shifted + v_max * dt * k;
    cost.lin_v[k] = -2.0 * weights.gamma_v * v_ref[k];
    cost.lin_s[k] = -2.0 * weights.gamma_s * s_star;
    cost.constant += weights.gamma_v * v_ref[k] * v_ref[k] + weights.gamma_s * s_star * s_star;
  }

  HorizonBounds bounds;
  bounds.max_traction = model.params->max_traction;
  bounds.max_brake = model.params->max_brake;
  bounds.v_max = v_max;
  bounds.pos_rows.assign(K + 1, PositionRow{});
  for (int k = 1; k <= K; ++k)
    bounds.pos_rows[k] = {1.0, s0_shifted + v_max * dt * k};

  if (light && hard_light_rows) {
    long mu1 = light->constraints[0].step - k0;
    long mu2 = light->constraints[1].step - k0;
    if (mu1 < 1 || mu2 < 1 || mu1 > K || mu2 > K)
      throw std::invalid_argument("light constraint index outside the plan horizon");
    // Pull one stage into the window when it is wide enough; the realized
    // trajectory then cannot graze a window edge under measurement noise.
    if (mu2 - mu1 >= 3) {
      mu1 += 1;
      mu2 -= 1;
    }
    const double p = light->position + out.coordinate_shift;
    bounds.pos_rows[mu1] = {1.0, p};
    bounds.pos_rows[mu2] = {-1.0, -p};
    out.light_rows = {mu1, mu2};
  }

  out.qp = build_horizon_qp(K, v0, s0_shifted, model, cost, bounds);
  return out;
}

PlanProfile extract_profile(const Eigen::VectorXd& z, int K, long k0, double v0, double s0,
                            double shift) {
  PlanProfile p;
  p.start = k0;
  p.horizon = K;
  p.speeds.resize(K + 1);
  p.positions.resize(K + 1);
  p.tractions.resize(K);
  p.brakes.resize(K);
  p.speeds[0] = v0;
  p.positions[0] = s0;
  for (int k = 1; k <= K; ++k) {
    p.speeds[k] = z(state_index(k));
    p.positions[k] = z(state_index(k) + 1) - shift;
  }
  for (int k = 0; k < K; ++k) {
    p.tractions[k] = z(control_index(k));
    p.brakes[k] = z(control_index(k) + 1);
  }
  return p;
}

Planner::Planner(PlannerConfig config, HorizonModel model, std::vector<TrafficLight> lights,
                 SpeedLimits limits, double pass_time, SolverConfig solver)
    : config_(std::move(config)),
      model_(std::move(model)),
      lights_(std::move(lights)),
      limits_(limits),
      pass_time_(pass_time),
      solver_(solver) {
  trigger_.margin = config_.margin;
  for (size_t j = 0; j < lights_.size(); ++j)
    trigger_.pending.emplace_back(static_cast<int>(j),
                                  trigger_threshold(lights_[j], model_.dt, limits_.v_max));
}

std::optional<PlanResult> Planner::maybe_replan(long t, double v_measured, double s_measured,
                                                const std::vector<TrafficLight>& lights_now) {
  const TriggerCheck check = should_trigger(trigger_, t, s_measured);
  if (check.reason == ReplanReason::None) return std::nullopt;
  return replan(t, v_measured, s_measured, check.reason, check.light_index, lights_now);
}

PlanResult Planner::replan(long t, double v0, double s0, ReplanReason reason, int light_index,
                           const std::vector<TrafficLight>& lights_now) {
  PlanResult result;
  result.reason = reason;

  if (reason == ReplanReason::Light) {
    const TrafficLight& light = lights_now.at(static_cast<size_t>(light_index));
    ReachabilityInputs in;
    in.distance = light.position - s0;
    in.leader_speed = v0;
    in.light = LightSnapshot::from(light, model_.dt);
    in.limits = limits_;
    in.pass_time = pass_time_;
    in.max_traction = model_.params->max_traction;
    in.mass = model_.mass;
    LightContext ctx;
    ctx.light_index = light_index;
    ctx.position = light.position;
    ctx.trigger_step = t;
    ctx.decision = classify(in);
    ctx.constraints = position_constraints(ctx.decision, light.position, t, model_.dt);
    active_light_ = ctx;
  } else if (active_light_) {
    // Keep the window of a still-uncrossed light across a periodic replan; drop
    // it once the leader has passed the light or the window itself elapsed.
    const long mu2 = active_light_->constraints[1].step - t;
    if (s0 >= active_light_->position || mu2 < 2) active_light_.reset();
  }

  std::optional<LightContext> light = active_light_;
  std::optional<long> mu2;
  if (light) mu2 = light->constraints[1].step - t;
  const int K = plan_horizon(config_.default_horizon, mu2);

  std::vector<double> v_ref(K + 1, config_.cruise_ref);
  if (light) {
    const ReachabilityDecision& d = light->decision;
    for (int k = 0; k <= K; ++k) {
      if (!d.stop && config_.ref_policy == RefPolicy::BandTop)
        v_ref[k] = d.band->hi;
      else
        v_ref[k] = reference_speed(config_.cruise_ref, t + k, t, K, &d, v0);
    }
  }

  AssembledPlan assembled =
      assemble_long_term(t, v0, s0, model_, config_.weights, K, light, v_ref, limits_.v_max,
                         config_.hard_light_rows);

  Eigen::VectorXd z0;
  const long elapsed = t - warm_step_;
  if (warm_horizon_ == K && elapsed > 0 && elapsed < K && assembled.coordinate_shift == 0.0) {
    z0 = warm_;
    for (long i = 0; i < elapsed; ++i) z0 = shift_warm_start(z0, K, model_.dt);
  } else {
    z0 = rollout_hold_speed(K, v0, s0 + assembled.coordinate_shift, model_.dt);
  }

  SolveResult solved = solve(assembled.qp, solver_, z0);
  result.solver_ok = solved.ok();
  result.iterations = solved.iterations;
  result.residual_norm = solved.residual_norm;
  result.light = light;

  if (solved.ok()) {
    profile_ = extract_profile(solved.z, K, t, v0, s0, assembled.coordinate_shift);
    trigger_.last_start = t;
    trigger_.last_horizon = K;
    warm_ = solved.z;
    warm_horizon_ = K;
    warm_step_ = t;
  } else if (has_plan() && profile_.covers(t, trigger_.margin)) {
    // Fall back to the previous plan; leaving the trigger state untouched makes
    // the exhaustion condition fire again next step until a solve succeeds.
  } else {
    // No usable previous plan: hold speed as an emergency profile.
    const int hold = config_.default_horizon;
    profile_.start = t;
    profile_.horizon = hold;
    profile_.speeds.assign(hold + 1, v0);
    profile_.positions.resize(hold + 1);
    for (int k = 0; k <= hold; ++k) profile_.positions[k] = s0 + v0 * model_.dt * k;
    profile_.tractions.assign(hold, 0.0);
    profile_.brakes.assign(hold, 0.0);
    trigger_.last_start = t;
    trigger_.last_horizon = trigger_.margin + 1;  // retrigger almost immediately
  }
  result.profile = profile_;
  return result;
}

}  // namespace ecoplatoon
