#pragma once

#include <string>

#include "ecoplatoon/sim.hpp"

namespace ecoplatoon {

/// Column order is part of the output contract:
/// t,vehicle,true_v,true_s,meas_v,meas_s,f_t,f_b,fuel_rate,fuel_total,gap
void write_trace_csv(const Trace& trace, const std::string& path);

/// Events sidecar: crossings, plan triggers, flags.
void write_events_json(const Trace& trace, double dt, const std::string& path);

/// One CSV per long-term plan: k,v_l,s_l,f_t,f_b.
void write_plans_csv(const Trace& trace, const std::string& directory);

void write_sweep_csv(const std::vector<SweepRow>& table, const std::string& path);

/// mode,seed,t,fuel_total — cumulative platoon fuel per step.
void write_fuel_csv(const FuelComparison& cmp, double dt, const std::string& path);

std::string format_double(double value);

}  // namespace ecoplatoon
