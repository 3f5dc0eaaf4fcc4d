#include "ecoplatoon/trace_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace ecoplatoon {

using nlohmann::json;

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace

void write_trace_csv(const Trace& trace, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "t,vehicle,true_v,true_s,meas_v,meas_s,f_t,f_b,fuel_rate,fuel_total,gap\n";
  for (const auto& step : trace.steps) {
    for (size_t i = 0; i < step.vehicles.size(); ++i) {
      const auto& v = step.vehicles[i];
      out << step.t << ',' << i << ',' << format_double(v.true_speed) << ','
          << format_double(v.true_position) << ',' << format_double(v.meas_speed) << ','
          << format_double(v.meas_position) << ',' << format_double(v.traction) << ','
          << format_double(v.brake) << ',' << format_double(v.fuel_rate) << ','
          << format_double(v.fuel_total) << ',' << format_double(v.gap) << '\n';
    }
  }
}

void write_events_json(const Trace& trace, double dt, const std::string& path) {
  json j;
  j["crossings"] = json::array();
  for (const auto& c : trace.crossings) {
    j["crossings"].push_back({{"step", c.step},
                              {"time_s", c.step * dt},
                              {"vehicle", c.vehicle},
                              {"light", c.light},
                              {"state", c.state == LightState::Green ? "green" : "red"},
                              {"clock", c.clock},
                              {"interp_step", c.interp_time}});
  }
  j["plans"] = json::array();
  for (const auto& p : trace.plans) {
    json e = {{"step", p.step},
              {"reason", p.reason == ReplanReason::Light ? "light" : "periodic"},
              {"horizon", p.horizon},
              {"iterations", p.iterations},
              {"converged", p.converged}};
    if (p.had_decision) {
      e["light"] = p.light_index;
      e["stop_flag"] = p.stop_flag;
      e["option"] = p.option == CrossingOption::FirstWindow    ? "first_window"
                    : p.option == CrossingOption::SecondWindow ? "second_window"
                                                               : "stop";
    }
    j["plans"].push_back(e);
  }
  j["flags"] = json::array();
  for (const auto& f : trace.flags)
    j["flags"].push_back({{"step", f.step}, {"vehicle", f.vehicle}, {"kind", f.kind}});
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

void write_plans_csv(const Trace& trace, const std::string& directory) {
  std::filesystem::create_directories(directory);
  for (size_t idx = 0; idx < trace.plan_profiles.size(); ++idx) {
    const PlanProfile& p = trace.plan_profiles[idx];
    std::ofstream out =
        open_out(directory + "/plan_" + std::to_string(idx) + "_k" + std::to_string(p.start) +
                 ".csv");
    out << "k,v_l,s_l,f_t,f_b\n";
    for (int k = 0; k <= p.horizon; ++k) {
      out << (p.start + k) << ',' << format_double(p.speeds[static_cast<size_t>(k)]) << ','
          << format_double(p.positions[static_cast<size_t>(k)]) << ',';
      if (k < p.horizon)
        out << format_double(p.tractions[static_cast<size_t>(k)]) << ','
            << format_double(p.brakes[static_cast<size_t>(k)]);
      else
        out << ',';
      out << '\n';
    }
  }
}

void write_sweep_csv(const std::vector<SweepRow>& table, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "ratio,mode,successes,trials,rate\n";
  for (const auto& row : table) {
    out << format_double(row.ratio) << ',' << to_string(row.mode) << ',' << row.successes << ','
        << row.trials << ',' << format_double(row.rate()) << '\n';
  }
}

void write_fuel_csv(const FuelComparison& cmp, double dt, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "mode,seed,t,time_s,fuel_total\n";
  for (size_t i = 0; i < cmp.seeds.size(); ++i) {
    for (size_t k = 0; k < cmp.proposed[i].size(); ++k)
      out << "proposed," << cmp.seeds[i] << ',' << k << ',' << format_double(k * dt) << ','
          << format_double(cmp.proposed[i][k]) << '\n';
    for (size_t k = 0; k < cmp.acc[i].size(); ++k)
      out << "acc," << cmp.seeds[i] << ',' << k << ',' << format_double(k * dt) << ','
          << format_double(cmp.acc[i][k]) << '\n';
  }
}

}  // namespace ecoplatoon
