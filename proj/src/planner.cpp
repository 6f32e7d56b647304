#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "ptin/coupling.hpp"
#include "ptin/power_net.hpp"
#include "ptin/restoration.hpp"

namespace ptin::restore {

namespace {

constexpr double kLoadEps = 1e-9;

bool usable(const PdnLine& line) { return line.equipment_ok && line.switch_closed; }

std::vector<std::vector<std::size_t>> incident_lines(const PdnState& pdn) {
  std::vector<std::vector<std::size_t>> inc(pdn.buses.size());
  for (std::size_t k = 0; k < pdn.lines.size(); ++k) {
    inc[pdn.lines[k].from].push_back(k);
    inc[pdn.lines[k].to].push_back(k);
  }
  return inc;
}

// Buses reached from `start` over closed healthy lines, never crossing
// `blocked`, in BFS order.
std::vector<std::size_t> closed_component(const PdnState& pdn,
                                          const std::vector<std::vector<std::size_t>>& inc,
                                          std::size_t start, std::size_t blocked) {
  std::vector<std::uint8_t> seen(pdn.buses.size(), 0);
  std::vector<std::size_t> order{start};
  seen[start] = 1;
  for (std::size_t head = 0; head < order.size(); ++head) {
    for (std::size_t k : inc[order[head]]) {
      if (k == blocked || !usable(pdn.lines[k])) continue;
      const std::size_t o = pdn.lines[k].other(order[head]);
      if (seen[o] || !pdn.buses[o].equipment_ok) continue;
      seen[o] = 1;
      order.push_back(o);
    }
  }
  return order;
}

// Buses fed by the bulk grid alone.
std::vector<std::uint8_t> grid_fed(const PdnState& pdn) {
  std::vector<std::size_t> sources;
  for (std::size_t i = 0; i < pdn.buses.size(); ++i) {
    if (pdn.buses[i].is_source && pdn.buses[i].equipment_ok) sources.push_back(i);
  }
  return power::energization_sweep(pdn, sources);
}

// V2GS buses that can root a restoration microgrid: healthy and not already
// supplied by the bulk grid.
std::vector<std::size_t> outage_stations(const Scenario& live) {
  const auto fed = grid_fed(live.pdn);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < live.pdn.buses.size(); ++i) {
    const auto& b = live.pdn.buses[i];
    if (b.is_v2gs && b.equipment_ok && !fed[i]) out.push_back(i);
  }
  return out;
}

double sum_over(const std::vector<std::size_t>& buses, const std::vector<double>& per_bus) {
  double total = 0.0;
  for (std::size_t b : buses) total += per_bus[b];
  return total;
}

std::vector<double> bus_loads(const Scenario& s) {
  std::vector<double> out;
  for (const auto& b : s.pdn.buses) out.push_back(b.load_kw);
  return out;
}

// Load lost if `line` were opened in `s`.
double open_impact(const Scenario& s, std::size_t line) {
  PdnState trial = s.pdn;
  trial.lines[line].switch_closed = false;
  const auto e = power::energization_sweep(trial, power::active_sources(trial));
  double lost = 0.0;
  for (std::size_t i = 0; i < trial.buses.size(); ++i) {
    if (s.pdn.buses[i].energized && !e[i]) lost += trial.buses[i].load_kw;
  }
  return lost;
}

std::size_t least_impact_line(const Scenario& s, const std::vector<std::size_t>& lines) {
  std::size_t best = kNone;
  double best_loss = 0.0;
  for (std::size_t k : lines) {
    const double loss = open_impact(s, k);
    if (best == kNone || loss < best_loss - kLoadEps ||
        (std::abs(loss - best_loss) <= kLoadEps && s.pdn.lines[k].id < s.pdn.lines[best].id)) {
      best = k;
      best_loss = loss;
    }
  }
  return best;
}

// Lines on the closed path between buses a and b (empty if none).
std::vector<std::size_t> closed_path(const PdnState& pdn,
                                     const std::vector<std::vector<std::size_t>>& inc,
                                     std::size_t a, std::size_t b) {
  std::vector<std::size_t> via(pdn.buses.size(), kNone);
  std::vector<std::uint8_t> seen(pdn.buses.size(), 0);
  std::deque<std::size_t> queue{a};
  seen[a] = 1;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    if (u == b) break;
    for (std::size_t k : inc[u]) {
      if (!usable(pdn.lines[k])) continue;
      const std::size_t o = pdn.lines[k].other(u);
      if (seen[o]) continue;
      seen[o] = 1;
      via[o] = k;
      queue.push_back(o);
    }
  }
  std::vector<std::size_t> path;
  if (!seen[b]) return path;
  for (std::size_t u = b; u != a; u = pdn.lines[via[u]].other(u)) path.push_back(via[u]);
  std::reverse(path.begin(), path.end());
  return path;
}

struct Planner {
  const PlanOptions& opt;
  Scenario h;
  std::vector<std::vector<std::size_t>> inc;
  std::vector<double> facility;
  std::vector<double> loads;
  StagePlan plan;

  Planner(const Scenario& live, int stage, const PlanOptions& o)
      : opt(o), h(planning_state(live)), inc(incident_lines(h.pdn)),
        facility(facility_load_per_bus(h)), loads(bus_loads(h)) {
    plan.stage = stage;
  }

  RecoveryStep& push(StepKind kind, std::size_t line, std::size_t bus, std::size_t station,
                     const DaDecision& da) {
    RecoveryStep step;
    step.index = plan.steps.size();
    step.stage = plan.stage;
    step.kind = kind;
    step.line = line;
    step.bus = bus;
    step.station = station;
    if (da.via_uav) step.uav_sites = da.sites;
    plan.steps.push_back(step);
    return plan.steps.back();
  }

  void close_loads(RecoveryStep& step, const std::vector<std::size_t>& buses) {
    for (std::size_t b : buses) {
      h.pdn.buses[b].load_switch_closed = true;
      step.load_buses.push_back(b);
      step.demand_kw += loads[b];
      step.cn_utn_kw += facility[b];
    }
    refresh_coupled_state(h);
  }

  void open_line(std::size_t k, const std::string& why) {
    const auto& line = h.pdn.lines[k];
    const auto da = da_decision(h, {uav::open_requirement(line)}, {line.from, line.to}, opt);
    if (!da.feasible) {
      plan.diagnostics.push_back("cannot open line " + line.id + " (" + why +
                                 "): no DA path even with UAVs");
      return;
    }
    push(StepKind::open_line, k, kNone, kNone, da);
    h.pdn.lines[k].switch_closed = false;
    refresh_coupled_state(h);
  }

  // Pre-steps: no closed path between two stations, then radial.
  void separate_and_radialize(const std::vector<std::size_t>& stations) {
    for (std::size_t a = 0; a < stations.size(); ++a) {
      for (std::size_t b = a + 1; b < stations.size(); ++b) {
        while (true) {
          const auto path = closed_path(h.pdn, inc, stations[a], stations[b]);
          if (path.empty()) break;
          const std::size_t k = least_impact_line(h, path);
          open_line(k, "stations " + h.pdn.buses[stations[a]].id + " and " +
                           h.pdn.buses[stations[b]].id + " share a microgrid");
          if (h.pdn.lines[k].switch_closed) break;
        }
      }
    }
    for (int guard = 0; guard < 1000; ++guard) {
      const auto rad = power::check_radiality(h.pdn);
      if (rad.radial || rad.witness != power::Witness::cycle || rad.lines.empty()) break;
      const std::size_t k = least_impact_line(h, rad.lines);
      open_line(k, "loop");
      if (h.pdn.lines[k].switch_closed) break;
    }
  }

  // Energized buses inside station microgrids whose load switch is open.
  std::vector<std::size_t> open_switch_buses(bool facility_only) const {
    const auto sob = station_of_buses(h);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < h.pdn.buses.size(); ++i) {
      const auto& b = h.pdn.buses[i];
      if (sob[i] == kNone || !b.equipment_ok || b.load_switch_closed) continue;
      if (facility_only ? facility[i] <= kLoadEps : b.load_kw <= kLoadEps) continue;
      out.push_back(i);
    }
    return out;
  }

  bool close_load_switch(std::size_t bus, bool direct_only) {
    const auto sob = station_of_buses(h);
    if (direct_only && !h.pdn.buses[bus].comm) return false;
    const auto da = da_decision(h, {uav::bus_requirement(bus)}, {bus}, opt);
    if (!da.feasible) return false;
    auto& step = push(StepKind::close_load_switch, kNone, bus, sob[bus], da);
    close_loads(step, {bus});
    return true;
  }

  struct Frontier {
    Candidate cand;
    std::vector<std::size_t> new_buses;
    DaDecision da;
    std::size_t depth = 0;
  };

  // Lines with exactly one energized end inside a station microgrid whose
  // closure keeps the PDN radial and is DA-feasible (directly or with UAVs).
  std::vector<Frontier> admissible() const {
    const auto sob = station_of_buses(h);
    std::vector<std::size_t> depth(h.pdn.buses.size(), 0);
    for (std::size_t st : outage_stations(h)) {
      const auto order = closed_component(h.pdn, inc, st, kNone);
      std::vector<std::uint8_t> seen(h.pdn.buses.size(), 0);
      seen[st] = 1;
      for (std::size_t u : order) {
        for (std::size_t k : inc[u]) {
          if (!usable(h.pdn.lines[k])) continue;
          const std::size_t o = h.pdn.lines[k].other(u);
          if (seen[o]) continue;
          seen[o] = 1;
          depth[o] = depth[u] + 1;
        }
      }
    }
    std::vector<Frontier> out;
    for (std::size_t k = 0; k < h.pdn.lines.size(); ++k) {
      const auto& line = h.pdn.lines[k];
      if (!line.equipment_ok || line.switch_closed) continue;
      const bool ef = h.pdn.buses[line.from].energized;
      const bool et = h.pdn.buses[line.to].energized;
      if (ef == et) continue;
      const std::size_t lit = ef ? line.from : line.to;
      const std::size_t dark = line.other(lit);
      if (sob[lit] == kNone || !h.pdn.buses[dark].equipment_ok) continue;
      if (!power::close_keeps_radial(h.pdn, k)) continue;
      const auto da = da_decision(h, {uav::close_requirement(line)}, {line.from, line.to}, opt);
      if (!da.feasible) continue;
      Frontier f;
      f.new_buses = closed_component(h.pdn, inc, dark, k);
      f.cand.line = k;
      f.cand.new_bus = dark;
      f.cand.station = sob[lit];
      f.cand.cn_utn_kw = sum_over(f.new_buses, facility);
      f.cand.load_kw = sum_over(f.new_buses, loads);
      f.cand.via_uav = da.via_uav;
      f.da = da;
      f.depth = depth[lit];
      out.push_back(std::move(f));
    }
    return out;
  }

  // Energizes the chosen frontier and closes the load switches picked by
  // `take_load`.
  template <typename Pred>
  void close_frontier(const Frontier& f, Pred take_load) {
    auto& step = push(StepKind::close_line, f.cand.line, f.cand.new_bus, f.cand.station, f.da);
    h.pdn.lines[f.cand.line].switch_closed = true;
    refresh_coupled_state(h);
    std::vector<std::size_t> picked;
    for (std::size_t b : f.new_buses) {
      if (h.pdn.buses[b].energized && take_load(b)) picked.push_back(b);
    }
    std::sort(picked.begin(), picked.end());
    close_loads(step, picked);
  }
};

}  // namespace

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::a1: return "A1";
    case Strategy::a2: return "A2";
    case Strategy::a3: return "A3";
  }
  return "?";
}

std::optional<Strategy> parse_strategy(const std::string& name) {
  if (name == "A1" || name == "a1") return Strategy::a1;
  if (name == "A2" || name == "a2") return Strategy::a2;
  if (name == "A3" || name == "a3") return Strategy::a3;
  return std::nullopt;
}

const char* step_kind_name(StepKind k) {
  switch (k) {
    case StepKind::close_line: return "close_line";
    case StepKind::close_load_switch: return "close_load_switch";
    case StepKind::open_line: return "open_line";
  }
  return "?";
}

Scenario planning_state(const Scenario& live) {
  Scenario h = live;
  for (std::size_t st : outage_stations(live)) h.pdn.buses[st].station_online = true;
  refresh_coupled_state(h);
  return h;
}

std::vector<std::size_t> station_of_buses(const Scenario& s) {
  const auto& pdn = s.pdn;
  const auto inc = incident_lines(pdn);
  const auto fed = grid_fed(pdn);
  std::vector<std::size_t> out(pdn.buses.size(), kNone);
  for (std::size_t st = 0; st < pdn.buses.size(); ++st) {
    const auto& b = pdn.buses[st];
    if (!b.is_v2gs || !b.station_online || !b.equipment_ok || fed[st]) continue;
    for (std::size_t u : closed_component(pdn, inc, st, kNone)) {
      if (out[u] == kNone && pdn.buses[u].equipment_ok) out[u] = st;
    }
  }
  return out;
}

DaDecision da_decision(const Scenario& s, const std::vector<uav::Requirement>& reqs,
                       const std::vector<std::size_t>& buses_involved, const PlanOptions& opt) {
  DaDecision d;
  uav::UdssfInstance inst;
  inst.nodes = s.cn;
  for (const auto& b : s.pdn.buses) inst.buses.push_back(b.pos);
  inst.targets = reqs;
  std::vector<std::uint8_t> comm;
  for (const auto& b : s.pdn.buses) comm.push_back(b.comm ? 1 : 0);
  if (uav::targets_met(inst, comm)) {
    d.feasible = true;
    return d;
  }
  if (s.fleets.uavs.empty() || !s.set_off_warehouse()) return d;
  inst.uav_range_km = s.fleets.uavs.front().cn_range_km;
  inst.subset_cap = std::min(opt.udssf_cap, s.fleets.uavs.size());
  std::vector<Point> targets;
  for (std::size_t b : buses_involved) targets.push_back(s.pdn.buses[b].pos);
  inst.candidates = uav::candidate_sites(targets, inst.uav_range_km);
  const auto res = uav::solve_udssf(inst);
  if (!res.solved) return d;
  d.feasible = true;
  d.via_uav = !res.sites.empty();
  d.sites = res.sites;
  return d;
}

StagePlan plan_stage1(const Scenario& live, const PlanOptions& opt) {
  Planner p(live, 1, opt);
  const auto stations = outage_stations(live);
  if (stations.empty()) {
    p.plan.diagnostics.push_back("no V2GS can be energized");
    return std::move(p.plan);
  }
  p.separate_and_radialize(stations);

  // Facility buses already inside a station microgrid.
  for (std::size_t b : p.open_switch_buses(true)) {
    if (!p.close_load_switch(b, false)) p.plan.unrecoverable.push_back(b);
  }

  while (true) {
    auto frontier = p.admissible();
    if (frontier.empty()) break;
    std::size_t best = 0;
    for (std::size_t i = 1; i < frontier.size(); ++i) {
      const auto& a = frontier[i].cand;
      const auto& b = frontier[best].cand;
      if (a.cn_utn_kw > b.cn_utn_kw + kLoadEps) {
        best = i;
      } else if (std::abs(a.cn_utn_kw - b.cn_utn_kw) <= kLoadEps) {
        if (a.load_kw > b.load_kw + kLoadEps ||
            (std::abs(a.load_kw - b.load_kw) <= kLoadEps && a.new_bus < b.new_bus)) {
          best = i;
        }
      }
    }
    Round round;
    for (const auto& f : frontier) round.admissible.push_back(f.cand);
    round.chosen = best;
    p.plan.rounds.push_back(std::move(round));
    p.close_frontier(frontier[best], [&](std::size_t b) { return p.facility[b] > kLoadEps; });
  }
  return std::move(p.plan);
}

StagePlan plan_stage2(const Scenario& live, const PlanOptions& opt) {
  Planner p(live, 2, opt);
  const auto pending = p.open_switch_buses(false);
  std::vector<std::size_t> later;
  for (std::size_t b : pending) {
    if (!p.close_load_switch(b, true)) later.push_back(b);
  }
  for (std::size_t b : later) {
    if (!p.close_load_switch(b, false)) p.plan.unrecoverable.push_back(b);
  }
  return std::move(p.plan);
}

StagePlan plan_upstream(const Scenario& live, int stage, const PlanOptions& opt) {
  Planner p(live, stage, opt);
  const auto stations = outage_stations(live);
  if (stations.empty()) {
    p.plan.diagnostics.push_back("no V2GS can be energized");
    return std::move(p.plan);
  }
  p.separate_and_radialize(stations);
  for (std::size_t b : p.open_switch_buses(false)) {
    if (!p.close_load_switch(b, false)) p.plan.unrecoverable.push_back(b);
  }
  while (true) {
    auto frontier = p.admissible();
    if (frontier.empty()) break;
    std::size_t best = 0;
    for (std::size_t i = 1; i < frontier.size(); ++i) {
      const auto& a = frontier[i];
      const auto& b = frontier[best];
      if (a.depth < b.depth || (a.depth == b.depth && a.cand.line < b.cand.line)) best = i;
    }
    Round round;
    for (const auto& f : frontier) round.admissible.push_back(f.cand);
    round.chosen = best;
    p.plan.rounds.push_back(std::move(round));
    p.close_frontier(frontier[best], [&](std::size_t b) { return p.loads[b] > kLoadEps; });
  }
  return std::move(p.plan);
}

}  // namespace ptin::restore
