#include "ptin/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ptin::report {

namespace {

using json = nlohmann::ordered_json;

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string prefix(const restore::RunResult& r) { return restore::strategy_name(r.strategy); }

json step_json(const Scenario& s, const restore::RecoveryStep& step) {
  json j;
  j["index"] = step.index;
  j["kind"] = restore::step_kind_name(step.kind);
  if (step.line != kNone) j["line"] = s.pdn.lines[step.line].id;
  if (step.bus != kNone) j["bus"] = s.pdn.buses[step.bus].id;
  if (step.station != kNone) j["station"] = s.pdn.buses[step.station].id;
  json loads = json::array();
  for (std::size_t b : step.load_buses) loads.push_back(s.pdn.buses[b].id);
  j["load_switches"] = loads;
  j["demand_kw"] = step.demand_kw;
  j["cn_utn_kw"] = step.cn_utn_kw;
  json sites = json::array();
  for (const auto& p : step.uav_sites) sites.push_back({p.x_km, p.y_km});
  j["uav_sites"] = sites;
  return j;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

std::string events_json(const Scenario& s, const restore::RunResult& r) {
  json doc;
  doc["strategy"] = prefix(r);
  json events = json::array();
  for (const auto& e : r.events) {
    events.push_back({{"time_s", e.time_s}, {"kind", e.kind}, {"element", e.element},
                      {"detail", e.detail}});
  }
  doc["events"] = events;
  json plans = json::array();
  for (const auto& plan : r.plans) {
    json p;
    p["stage"] = plan.stage;
    json steps = json::array();
    for (const auto& step : plan.steps) steps.push_back(step_json(s, step));
    p["steps"] = steps;
    json diags = json::array();
    for (const auto& d : plan.diagnostics) diags.push_back(d);
    p["diagnostics"] = diags;
    plans.push_back(p);
  }
  doc["plans"] = plans;
  json unexecuted = json::array();
  for (const auto& u : r.unexecuted) unexecuted.push_back(u);
  doc["unexecuted"] = unexecuted;
  return doc.dump(1) + "\n";
}

std::string curve_csv(const restore::RunResult& r) {
  std::string out = "time_s,restored_kw\n";
  for (std::size_t t = 0; t < r.curve_kw.size(); ++t) {
    out += std::to_string(t) + "," + fixed(r.curve_kw[t], 3) + "\n";
  }
  return out;
}

std::string uav_traces_json(const restore::RunResult& r) {
  json doc = json::array();
  for (const auto& trace : r.uav_traces) {
    json t;
    t["stage"] = trace.stage;
    t["uav"] = trace.uav;
    json visits = json::array();
    for (std::size_t i = 0; i < trace.visits.size(); ++i) {
      const auto& v = trace.visits[i];
      visits.push_back({{"site", trace.site_ids[i]},
                        {"x_km", trace.site_pos[i].x_km},
                        {"y_km", trace.site_pos[i].y_km},
                        {"arrive_s", v.arrive_s},
                        {"depart_s", v.depart_s},
                        {"battery_arrive", v.battery_arrive},
                        {"battery_depart", v.battery_depart}});
    }
    t["visits"] = visits;
    doc.push_back(t);
  }
  return doc.dump(1) + "\n";
}

std::string dispatch_json(const restore::RunResult& r) {
  json doc = json::array();
  for (const auto& a : r.audits) {
    json j;
    j["stage"] = a.stage;
    j["time_s"] = a.time_s;
    json stations = json::array();
    for (std::size_t k = 0; k < a.instance.stations.size(); ++k) {
      stations.push_back({{"id", a.instance.stations[k].id},
                          {"requirement_kw", a.instance.stations[k].requirement_kw},
                          {"delivered_kw", a.solution.delivered_kw.empty()
                                               ? 0.0
                                               : a.solution.delivered_kw[k]},
                          {"shortfall_kw", a.solution.shortfall_kw.empty()
                                               ? 0.0
                                               : a.solution.shortfall_kw[k]}});
    }
    j["stations"] = stations;
    json assigned = json::array();
    const std::size_t n_st = a.instance.stations.size();
    for (std::size_t v = 0; v < a.instance.vehicles.size(); ++v) {
      const std::size_t k = a.solution.station_of(v, n_st);
      if (k == kNone) continue;
      assigned.push_back({{"vehicle", a.instance.vehicles[v].id},
                          {"station", a.instance.stations[k].id},
                          {"output_kw", a.instance.vehicles[v].output_kw},
                          {"travel_s", a.instance.time(v, k)}});
    }
    j["candidates"] = a.instance.vehicles.size();
    j["assigned"] = assigned;
    j["feasible"] = a.solution.feasible;
    j["objective_s"] = a.solution.objective_s;
    json violations = json::array();
    for (const auto& v : a.violations) violations.push_back(v);
    j["violations"] = violations;
    doc.push_back(j);
  }
  return doc.dump(1) + "\n";
}

std::string summary_json(const Scenario& s, const restore::RunResult& r) {
  json doc;
  doc["scenario"] = s.name;
  doc["strategy"] = prefix(r);
  doc["seed"] = s.params.seed;
  doc["horizon_s"] = r.curve_kw.size();
  doc["outage_load_kw"] = r.outage_load_kw;
  doc["final_restored_kw"] = r.final_kw();
  doc["time_to_50_s"] = r.time_to_fraction(0.5);
  doc["time_to_90_s"] = r.time_to_fraction(0.9);
  doc["executed_steps"] = r.executed_steps();
  doc["facility_fraction_before_stage2"] = r.facility_fraction_before_stage2;
  json stages = json::array();
  for (const auto& st : r.stages) {
    stages.push_back({{"stage", st.stage},
                      {"start_s", st.start_s},
                      {"end_s", st.end_s},
                      {"planned", st.planned},
                      {"executed", st.executed},
                      {"unexecuted", st.unexecuted},
                      {"routing_optimal", st.routing_optimal},
                      {"facility_fraction_at_end", st.facility_fraction_at_end}});
  }
  doc["stages"] = stages;
  json failures = json::array();
  for (const auto& f : r.invariant_failures) failures.push_back(f);
  doc["invariant_failures"] = failures;
  json density = json::object();
  for (std::size_t l = 0; l < r.final_lane_density.size() && l < s.utn.lanes.size(); ++l) {
    density[s.utn.lanes[l].id] = r.final_lane_density[l];
  }
  doc["final_lane_density_veh_per_km"] = density;
  return doc.dump(1) + "\n";
}

std::vector<std::filesystem::path> write_run(const std::filesystem::path& dir, const Scenario& s,
                                             const restore::RunResult& r) {
  std::filesystem::create_directories(dir);
  const std::string p = prefix(r);
  std::vector<std::pair<std::string, std::string>> files = {
      {p + "_events.json", events_json(s, r)},
      {p + "_curve.csv", curve_csv(r)},
      {p + "_uav_traces.json", uav_traces_json(r)},
      {p + "_dispatch.json", dispatch_json(r)},
      {p + "_summary.json", summary_json(s, r)},
  };
  std::vector<std::filesystem::path> written;
  for (const auto& [name, text] : files) {
    written.push_back(dir / name);
    write_file(written.back(), text);
  }
  return written;
}

std::string comparison_table(const std::vector<restore::RunResult>& runs) {
  std::ostringstream os;
  os << "strategy  final_kW   t50_s    t90_s    steps  unexecuted\n";
  for (const auto& r : runs) {
    char line[160];
    std::snprintf(line, sizeof line, "%-8s  %-9s  %-7s  %-7s  %-5zu  %zu\n",
                  restore::strategy_name(r.strategy), fixed(r.final_kw(), 1).c_str(),
                  fixed(r.time_to_fraction(0.5), 0).c_str(),
                  fixed(r.time_to_fraction(0.9), 0).c_str(), r.executed_steps(),
                  r.unexecuted.size());
    os << line;
  }
  return os.str();
}

}  // namespace ptin::report
