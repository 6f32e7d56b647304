#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "ptin/coupling.hpp"
#include "ptin/restoration.hpp"

namespace ptin::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = 1e-9;

bool live_line(const PdnLine& l) { return l.equipment_ok && l.switch_closed; }

bool is_root(const PdnBus& b) {
  return b.equipment_ok && (b.is_source || (b.is_v2gs && b.station_online));
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};

// Whole metres, same lattice convention as the scenario data.
bool reach(Point a, Point b, double range_km) {
  const double dx = std::round((a.x_km - b.x_km) * 1000.0);
  const double dy = std::round((a.y_km - b.y_km) * 1000.0);
  const double r = std::round(range_km * 1000.0);
  return dx * dx + dy * dy <= r * r;
}

}  // namespace

std::vector<std::uint8_t> energized_bfs(const PdnState& pdn) {
  const std::size_t n = pdn.buses.size();
  std::vector<std::uint8_t> on(n, 0);
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < n; ++i) {
    if (is_root(pdn.buses[i])) {
      on[i] = 1;
      stack.push_back(i);
    }
  }
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (const auto& l : pdn.lines) {
      if (!live_line(l) || (l.from != u && l.to != u)) continue;
      const std::size_t o = l.from == u ? l.to : l.from;
      if (on[o] || !pdn.buses[o].equipment_ok) continue;
      on[o] = 1;
      stack.push_back(o);
    }
  }
  return on;
}

bool radial_union_find(const PdnState& pdn) {
  const auto on = energized_bfs(pdn);
  UnionFind uf(pdn.buses.size());
  for (const auto& l : pdn.lines) {
    if (!live_line(l) || !on[l.from] || !on[l.to]) continue;
    if (!uf.unite(l.from, l.to)) return false;
  }
  std::vector<int> roots(pdn.buses.size(), 0);
  for (std::size_t i = 0; i < pdn.buses.size(); ++i) {
    if (on[i] && is_root(pdn.buses[i]) && ++roots[uf.find(i)] > 1) return false;
  }
  return true;
}

std::vector<std::uint8_t> comm_reachability(const std::vector<CnNode>& nodes) {
  const std::size_t n = nodes.size();
  std::vector<std::uint8_t> comm(n, 0);
  std::vector<std::size_t> queue;
  auto eligible = [&](std::size_t a) { return nodes[a].energized || nodes[a].is_uav_backed; };
  for (std::size_t a = 0; a < n; ++a) {
    if (nodes[a].is_central && eligible(a)) {
      comm[a] = 1;
      queue.push_back(a);
    }
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::size_t a = queue[head];
    for (std::size_t b = 0; b < n; ++b) {
      if (comm[b] || !eligible(b) || a == b) continue;
      if (!reach(nodes[a].pos, nodes[b].pos, std::max(nodes[a].range_km, nodes[b].range_km))) {
        continue;
      }
      comm[b] = 1;
      queue.push_back(b);
    }
  }
  return comm;
}

std::vector<std::uint8_t> covered_buses(const std::vector<CnNode>& nodes,
                                        const std::vector<std::uint8_t>& node_comm,
                                        const std::vector<Point>& buses) {
  std::vector<std::uint8_t> out(buses.size(), 0);
  for (std::size_t i = 0; i < buses.size(); ++i) {
    for (std::size_t a = 0; a < nodes.size() && !out[i]; ++a) {
      if (node_comm[a] && reach(nodes[a].pos, buses[i], nodes[a].range_km)) out[i] = 1;
    }
  }
  return out;
}

std::optional<double> dispatch_exhaustive(const dispatch::DispatchInstance& inst) {
  const std::size_t V = inst.vehicles.size();
  const std::size_t S = inst.stations.size();
  std::vector<std::size_t> choice(V, 0);  // 0 = unassigned, k = station k-1
  std::optional<double> best;
  while (true) {
    std::vector<double> delivered(S, 0.0);
    double latest = 0.0;
    bool ok = true;
    for (std::size_t v = 0; v < V && ok; ++v) {
      if (choice[v] == 0) continue;
      const std::size_t k = choice[v] - 1;
      const double t = inst.travel_s[v * S + k];
      if (!std::isfinite(t)) {
        ok = false;
        break;
      }
      const auto& veh = inst.vehicles[v];
      const double cap =
          veh.output_kw * (inst.expected_capacity && veh.kind == VehicleKind::ev ? inst.eta : 1.0);
      delivered[k] += cap;
      latest = std::max(latest, t);
    }
    for (std::size_t k = 0; k < S && ok; ++k) {
      ok = delivered[k] + 1e-9 >= inst.stations[k].requirement_kw;
    }
    if (ok && (!best || latest < *best)) best = latest;
    std::size_t i = 0;
    while (i < V && ++choice[i] > S) choice[i++] = 0;
    if (i == V) break;
  }
  return best;
}

std::optional<double> routing_exhaustive(const uav::RoutingInstance& inst) {
  std::vector<std::pair<std::size_t, std::size_t>> flat;  // (group, site)
  for (std::size_t g = 0; g < inst.groups.size(); ++g) {
    for (std::size_t a : inst.groups[g].sites) flat.emplace_back(g, a);
  }
  if (flat.empty()) return 0.0;
  std::vector<std::size_t> swaps;
  for (std::size_t a = 0; a < inst.sites.size(); ++a) {
    if (inst.sites[a].kind == uav::SiteKind::battery_swap) swaps.push_back(a);
  }
  const std::size_t R = inst.uavs.size();
  auto dist = [&](std::size_t a, std::size_t b) {
    return std::hypot(inst.sites[a].pos.x_km - inst.sites[b].pos.x_km,
                      inst.sites[a].pos.y_km - inst.sites[b].pos.y_km);
  };

  std::vector<std::size_t> who(flat.size(), 0);
  std::vector<std::size_t> swap_at(flat.size(), kNone);  // swap site taken before visit
  std::optional<double> best;

  auto simulate = [&]() {
    struct U {
      std::size_t pos = 0;
      double t = 0.0;
      double battery = 1.0;
      bool used = false;
    };
    std::vector<U> u(R);
    for (std::size_t r = 0; r < R; ++r) u[r].t = inst.uavs[r].available_s;
    double prev_end = 0.0;
    std::size_t i = 0;
    for (std::size_t g = 0; g < inst.groups.size(); ++g) {
      const auto& grp = inst.groups[g];
      const double earliest = std::max(grp.ready_s, prev_end);
      const double rho_km = grp.work_s * inst.hover_equiv_kmh / 3600.0;
      double latest_arrival = earliest;
      std::vector<std::pair<std::size_t, double>> here;  // (uav, battery at arrival)
      for (std::size_t k = 0; k < grp.sites.size(); ++k, ++i) {
        const std::size_t r = who[i];
        const std::size_t site = flat[i].second;
        auto& s = u[r];
        const double draw = inst.uavs[r].per_km_draw;
        const double kmh = inst.uavs[r].speed_kmh;
        double depart = s.t;
        if (swap_at[i] != kNone) {
          if (!s.used) return;
          const std::size_t h = swap_at[i];
          s.battery -= dist(s.pos, h) * draw;
          if (s.battery < -kEps) return;
          depart = s.t + dist(s.pos, h) / kmh * 3600.0 + inst.sites[h].swap_duration_s;
          s.battery = 1.0;
          s.pos = h;
        }
        s.battery -= dist(s.pos, site) * draw;
        if (s.battery < -kEps || s.battery - rho_km * draw < -kEps) return;
        const double arrive = std::max(depart + dist(s.pos, site) / kmh * 3600.0, earliest);
        latest_arrival = std::max(latest_arrival, arrive);
        s.pos = site;
        s.used = true;
        here.emplace_back(r, s.battery);
      }
      const double end = latest_arrival + grp.work_s;
      for (const auto& [r, battery] : here) {
        u[r].t = end;
        u[r].battery = battery - rho_km * inst.uavs[r].per_km_draw;
      }
      prev_end = end;
    }
    double objective = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      if (!u[r].used) continue;
      if (u[r].battery - dist(u[r].pos, 0) * inst.uavs[r].per_km_draw < -kEps) return;
      objective = std::max(objective, u[r].t + dist(u[r].pos, 0) / inst.uavs[r].speed_kmh * 3600.0);
    }
    if (!best || objective < *best) best = objective;
  };

  // Swap placements: each swap site before at most one visit, at most one
  // swap per visit.
  std::function<void(std::size_t)> place = [&](std::size_t h) {
    if (h == swaps.size()) {
      simulate();
      return;
    }
    place(h + 1);
    for (std::size_t i = 0; i < flat.size(); ++i) {
      if (swap_at[i] != kNone) continue;
      swap_at[i] = swaps[h];
      place(h + 1);
      swap_at[i] = kNone;
    }
  };
  std::function<void(std::size_t)> assign = [&](std::size_t i) {
    if (i == flat.size()) {
      place(0);
      return;
    }
    for (std::size_t r = 0; r < R; ++r) {
      bool clash = false;
      for (std::size_t j = 0; j < i; ++j) clash = clash || (flat[j].first == flat[i].first && who[j] == r);
      if (clash) continue;
      who[i] = r;
      assign(i + 1);
    }
  };
  assign(0);
  return best;
}

bool udssf_sites_work(const uav::UdssfInstance& inst, const std::vector<Point>& sites) {
  auto nodes = inst.nodes;
  for (const auto& p : sites) {
    CnNode n;
    n.id = "uav";
    n.pos = p;
    n.range_km = inst.uav_range_km;
    n.is_uav_backed = true;
    nodes.push_back(n);
  }
  const auto comm = comm_reachability(nodes);
  const auto bus = covered_buses(nodes, comm, inst.buses);
  for (const auto& req : inst.targets) {
    bool met = false;
    for (const auto& alt : req) {
      bool all = true;
      for (std::size_t b : alt) all = all && bus[b];
      met = met || all;
    }
    if (!met) return false;
  }
  return true;
}

std::optional<std::size_t> udssf_exhaustive(const uav::UdssfInstance& inst) {
  const std::size_t n = inst.candidates.size();
  std::optional<std::size_t> best;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    const auto size = static_cast<std::size_t>(__builtin_popcountll(mask));
    if (best && size >= *best) continue;
    std::vector<Point> sites;
    for (std::size_t c = 0; c < n; ++c) {
      if (mask >> c & 1) sites.push_back(inst.candidates[c]);
    }
    if (udssf_sites_work(inst, sites)) best = size;
  }
  return best;
}

double path_exhaustive(const UtnState& utn, std::size_t origin, std::size_t destination,
                       const traffic::TravelClass& cls) {
  double best = kInf;
  std::vector<std::uint8_t> seen(utn.junctions.size(), 0);
  std::function<void(std::size_t, double)> walk = [&](std::size_t at, double t) {
    if (at == destination) {
      best = std::min(best, t);
      return;
    }
    seen[at] = 1;
    for (std::size_t l = 0; l < utn.lanes.size(); ++l) {
      if (utn.lanes[l].from != at || seen[utn.lanes[l].to]) continue;
      walk(utn.lanes[l].to, t + traffic::edge_time(utn, l, cls));
    }
    seen[at] = 0;
  };
  walk(origin, 0.0);
  return best;
}

std::vector<std::string> replay_stage1(const Scenario& live, const restore::StagePlan& plan,
                                       std::size_t udssf_cap) {
  std::vector<std::string> issues;
  Scenario s = restore::planning_state(live);
  const auto facility = facility_load_per_bus(s);
  std::vector<Point> bus_pos;
  for (const auto& b : s.pdn.buses) bus_pos.push_back(b.pos);
  std::size_t round = 0;

  for (const auto& step : plan.steps) {
    if (step.kind == restore::StepKind::close_line) {
      // Independent admission set for this round.
      const auto on = energized_bfs(s.pdn);
      PdnState grid_only = s.pdn;
      for (auto& b : grid_only.buses) b.station_online = false;
      const auto grid = energized_bfs(grid_only);
      const auto comm = comm_reachability(s.cn);
      const auto bus_comm = covered_buses(s.cn, comm, bus_pos);

      struct Adm {
        std::size_t line, bus;
        double y, load;
      };
      std::vector<Adm> adm;
      for (std::size_t k = 0; k < s.pdn.lines.size(); ++k) {
        const auto& line = s.pdn.lines[k];
        if (!line.equipment_ok || line.switch_closed || on[line.from] == on[line.to]) continue;
        const std::size_t lit = on[line.from] ? line.from : line.to;
        const std::size_t dark = lit == line.from ? line.to : line.from;
        if (grid[lit] || !s.pdn.buses[dark].equipment_ok) continue;
        PdnState trial = s.pdn;
        trial.lines[k].switch_closed = true;
        if (!radial_union_find(trial)) continue;
        bool da = bus_comm[line.from] && bus_comm[line.to];
        if (!da && !s.fleets.uavs.empty() && s.set_off_warehouse()) {
          uav::UdssfInstance inst;
          inst.nodes = s.cn;
          inst.buses = bus_pos;
          inst.targets = {uav::close_requirement(line)};
          inst.uav_range_km = s.fleets.uavs.front().cn_range_km;
          inst.candidates =
              uav::candidate_sites({bus_pos[line.from], bus_pos[line.to]}, inst.uav_range_km);
          const std::size_t cap = std::min({udssf_cap, s.fleets.uavs.size(),
                                            inst.candidates.size()});
          // Any subset up to the cap.
          std::vector<std::size_t> pick;
          std::function<bool(std::size_t)> search = [&](std::size_t from) {
            if (!pick.empty()) {
              std::vector<Point> sites;
              for (std::size_t c : pick) sites.push_back(inst.candidates[c]);
              if (udssf_sites_work(inst, sites)) return true;
            }
            if (pick.size() == cap) return false;
            for (std::size_t c = from; c < inst.candidates.size(); ++c) {
              pick.push_back(c);
              if (search(c + 1)) return true;
              pick.pop_back();
            }
            return false;
          };
          da = search(0);
        }
        if (!da) continue;
        const auto after = energized_bfs(trial);
        double y = 0.0;
        double load = 0.0;
        for (std::size_t i = 0; i < after.size(); ++i) {
          if (after[i] && !on[i]) {
            y += facility[i];
            load += s.pdn.buses[i].load_kw;
          }
        }
        adm.push_back({k, dark, y, load});
      }

      const std::string tag = "round " + std::to_string(round);
      if (round >= plan.rounds.size()) {
        issues.push_back(tag + ": plan has more line steps than recorded rounds");
        break;
      }
      const auto& rec = plan.rounds[round];
      std::vector<std::size_t> mine;
      std::vector<std::size_t> theirs;
      for (const auto& a : adm) mine.push_back(a.line);
      for (const auto& c : rec.admissible) theirs.push_back(c.line);
      std::sort(mine.begin(), mine.end());
      std::sort(theirs.begin(), theirs.end());
      if (mine != theirs) issues.push_back(tag + ": admissible set differs");
      if (adm.empty()) {
        issues.push_back(tag + ": a line was closed with nothing admissible");
      } else {
        const Adm* best = &adm.front();
        for (const auto& a : adm) {
          if (a.y > best->y + kEps ||
              (std::abs(a.y - best->y) <= kEps &&
               (a.load > best->load + kEps ||
                (std::abs(a.load - best->load) <= kEps && a.bus < best->bus)))) {
            best = &a;
          }
        }
        if (best->line != step.line) {
          issues.push_back(tag + ": chose line " + s.pdn.lines[step.line].id + " but " +
                           s.pdn.lines[best->line].id + " carries more CN/UTN load");
        }
      }
      for (std::size_t b : step.load_buses) {
        if (facility[b] <= 0.0) {
          issues.push_back(tag + ": closed the load switch of non-facility bus " +
                           s.pdn.buses[b].id);
        }
      }
      ++round;
    }

    if (step.kind == restore::StepKind::open_line) s.pdn.lines[step.line].switch_closed = false;
    if (step.kind == restore::StepKind::close_line) s.pdn.lines[step.line].switch_closed = true;
    refresh_coupled_state(s);
    for (std::size_t b : step.load_buses) s.pdn.buses[b].load_switch_closed = true;
    refresh_coupled_state(s);
  }
  if (round != plan.rounds.size()) issues.push_back("recorded rounds outnumber line steps");
  return issues;
}

}  // namespace ptin::oracle
