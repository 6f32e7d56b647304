#include "ptin/uav_dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "ptin/comm_net.hpp"

namespace ptin::uav {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = 1e-9;

}  // namespace

// ---------------------------------------------------------------------------
// Site selection

Requirement close_requirement(const PdnLine& line) { return {{line.from, line.to}}; }

Requirement open_requirement(const PdnLine& line) {
  Requirement req;
  if (line.control_from) req.push_back({line.from});
  if (line.control_to) req.push_back({line.to});
  return req;
}

Requirement bus_requirement(std::size_t bus) { return {{bus}}; }

std::vector<Point> candidate_sites(const std::vector<Point>& target_buses, double uav_range_km) {
  std::vector<Point> out;
  std::set<std::pair<double, double>> seen;
  auto add = [&](Point p) {
    p = snap(p);
    if (seen.insert({p.x_km, p.y_km}).second) out.push_back(p);
  };
  if (target_buses.empty()) return out;
  for (Point p : target_buses) add(p);
  for (std::size_t a = 0; a < target_buses.size(); ++a) {
    for (std::size_t b = a + 1; b < target_buses.size(); ++b) {
      add({(target_buses[a].x_km + target_buses[b].x_km) / 2.0,
           (target_buses[a].y_km + target_buses[b].y_km) / 2.0});
    }
  }
  double x0 = target_buses[0].x_km, x1 = x0, y0 = target_buses[0].y_km, y1 = y0;
  for (Point p : target_buses) {
    x0 = std::min(x0, p.x_km);
    x1 = std::max(x1, p.x_km);
    y0 = std::min(y0, p.y_km);
    y1 = std::max(y1, p.y_km);
  }
  const double step = uav_range_km / std::sqrt(2.0);
  if (step > 0.0) {
    const auto nx = static_cast<std::size_t>(std::ceil((x1 - x0) / step));
    const auto ny = static_cast<std::size_t>(std::ceil((y1 - y0) / step));
    for (std::size_t i = 0; i <= nx; ++i) {
      for (std::size_t j = 0; j <= ny; ++j) {
        add({std::min(x1, x0 + step * i), std::min(y1, y0 + step * j)});
      }
    }
  }
  // A ring just inside the range around each target lets a site hang off
  // the edge of the live CN while still covering the target.
  const double ring = uav_range_km - 0.001;
  if (ring > 0.0) {
    for (Point p : target_buses) {
      for (int k = 0; k < 8; ++k) {
        const double a = k * std::acos(-1.0) / 4.0;
        add({p.x_km + ring * std::cos(a), p.y_km + ring * std::sin(a)});
      }
    }
  }
  return out;
}

std::vector<std::uint8_t> bus_comm_with_sites(const UdssfInstance& inst,
                                              const std::vector<Point>& sites) {
  std::vector<CnNode> nodes = inst.nodes;
  for (std::size_t k = 0; k < sites.size(); ++k) {
    CnNode node;
    node.id = "uav-site-" + std::to_string(k);
    node.pos = sites[k];
    node.range_km = inst.uav_range_km;
    node.is_uav_backed = true;
    nodes.push_back(std::move(node));
  }
  const auto cov = comm::coverage_pairs(nodes, inst.buses, {});
  const auto conn = comm::solve_connectivity(nodes, cov);
  return comm::derive_bus_comm(cov, conn.comm);
}

bool targets_met(const UdssfInstance& inst, const std::vector<std::uint8_t>& bus_comm) {
  for (const auto& req : inst.targets) {
    bool ok = false;
    for (const auto& alt : req) {
      bool all = true;
      for (std::size_t b : alt) all = all && bus_comm[b];
      if (all) {
        ok = true;
        break;
      }
    }
    if (!ok) return false;
  }
  return true;
}

UdssfResult solve_udssf(const UdssfInstance& inst) {
  UdssfResult result;
  const auto base = bus_comm_with_sites(inst, {});
  ++result.evaluated;
  if (targets_met(inst, base)) {
    result.solved = true;
    return result;
  }
  const std::size_t n = inst.candidates.size();
  if (n == 0) return result;
  // Adding UAV nodes never removes comm, so if every candidate together
  // fails, no subset can succeed.
  ++result.evaluated;
  if (!targets_met(inst, bus_comm_with_sites(inst, inst.candidates))) return result;

  std::set<std::size_t> needed;
  for (const auto& req : inst.targets) {
    for (const auto& alt : req) {
      for (std::size_t b : alt) {
        if (!base[b]) needed.insert(b);
      }
    }
  }
  std::vector<std::uint8_t> useful(n, 0);
  const double r = std::round(inst.uav_range_km * 1000.0);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t b : needed) {
      if (within_range(inst.candidates[c], inst.buses[b], inst.uav_range_km)) useful[c] = 1;
    }
    for (const auto& node : inst.nodes) {
      if (!node.eligible() || node.comm) continue;
      const double reach = std::max(r, std::round(node.range_km * 1000.0));
      if (distance_sq_m2(inst.candidates[c], node.pos) <= reach * reach) useful[c] = 1;
    }
  }

  const std::size_t cap = std::min(inst.subset_cap, n);
  std::vector<std::size_t> combo;
  for (std::size_t k = 1; k <= cap; ++k) {
    combo.resize(k);
    for (std::size_t i = 0; i < k; ++i) combo[i] = i;
    while (true) {
      bool any_useful = false;
      for (std::size_t c : combo) any_useful = any_useful || useful[c];
      if (any_useful) {
        std::vector<Point> sites;
        for (std::size_t c : combo) sites.push_back(inst.candidates[c]);
        ++result.evaluated;
        if (targets_met(inst, bus_comm_with_sites(inst, sites))) {
          result.solved = true;
          result.chosen = combo;
          result.sites = sites;
          return result;
        }
      }
      // Next combination in lexicographic order.
      std::size_t i = k;
      while (i > 0 && combo[i - 1] == n - k + (i - 1)) --i;
      if (i == 0) break;
      ++combo[i - 1];
      for (std::size_t j = i; j < k; ++j) combo[j] = combo[j - 1] + 1;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Routing

double RoutingInstance::distance_km(std::size_t a, std::size_t b) const {
  return ptin::distance_km(sites[a].pos, sites[b].pos);
}

double RoutingInstance::work_draw(std::size_t uav, std::size_t group) const {
  return groups[group].work_s * hover_equiv_kmh / 3600.0 * uavs[uav].per_km_draw;
}

namespace {

struct FleetState {
  std::size_t pos = 0;
  double free_s = 0.0;
  double battery = 1.0;
  bool used = false;
  std::vector<Visit> visits;
};

struct Option {
  std::size_t uav;
  std::size_t swap;  // kNone for a direct leg
  double arrive;
  double battery_arrive;
  double swap_arrive;
  double swap_battery;
};

class RouteSearch {
 public:
  explicit RouteSearch(const RoutingInstance& inst) : inst_(inst) {
    const std::size_t n = inst.sites.size();
    dist_.assign(n * n, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) dist_[a * n + b] = inst.distance_km(a, b);
    }
    for (std::size_t a = 0; a < n; ++a) {
      if (inst.sites[a].kind == SiteKind::battery_swap) swaps_.push_back(a);
    }
    for (std::size_t g = 0; g < inst.groups.size(); ++g) {
      for (std::size_t a : inst.groups[g].sites) flat_.push_back({g, a});
    }
    max_speed_ = 0.0;
    for (const auto& u : inst.uavs) max_speed_ = std::max(max_speed_, u.speed_kmh);
    fleet_.resize(inst.uavs.size());
    for (std::size_t r = 0; r < inst.uavs.size(); ++r) fleet_[r].free_s = inst.uavs[r].available_s;
    swap_used_.assign(n, 0);
  }

  RouteSolution run() {
    RouteSolution sol;
    if (inst_.groups.empty()) {
      sol.feasible = true;
      sol.optimal = true;
      sol.routes.resize(inst_.uavs.size());
      for (std::size_t r = 0; r < inst_.uavs.size(); ++r) sol.routes[r].uav = r;
      return sol;
    }
    for (std::size_t g = 0; g < inst_.groups.size(); ++g) {
      if (inst_.groups[g].sites.size() > inst_.uavs.size()) {
        sol.failure = "workgroup " + std::to_string(g) + " needs " +
                      std::to_string(inst_.groups[g].sites.size()) + " UAVs but the fleet has " +
                      std::to_string(inst_.uavs.size());
        return sol;
      }
    }
    group_uavs_.assign(inst_.groups.size(), {});
    arrivals_.assign(inst_.groups.size(), {});
    ends_.assign(inst_.groups.size(), 0.0);
    search(0);
    sol.nodes = nodes_;
    sol.optimal = !aborted_;
    if (!std::isfinite(best_)) {
      if (aborted_) {
        sol.failure = "node budget exhausted before any feasible route was found";
      } else if (deepest_ < flat_.size()) {
        sol.failure = "site " + inst_.sites[flat_[deepest_].second].id +
                      " cannot be reached within the battery budget";
      } else {
        sol.failure = "UAVs cannot return to the set-off site within the battery budget";
      }
      return sol;
    }
    sol.feasible = true;
    sol.objective_s = best_;
    sol.routes = best_routes_;
    return sol;
  }

 private:
  double seconds(std::size_t r, std::size_t a, std::size_t b) const {
    return dist_[a * inst_.sites.size() + b] / inst_.uavs[r].speed_kmh * 3600.0;
  }
  double drain(std::size_t r, std::size_t a, std::size_t b) const {
    return dist_[a * inst_.sites.size() + b] * inst_.uavs[r].per_km_draw;
  }

  double group_start(std::size_t g) const {
    return std::max(inst_.groups[g].ready_s, g > 0 ? ends_[g - 1] : 0.0);
  }

  double lower_bound(std::size_t g) const {
    double t = group_start(g);
    for (double a : arrivals_[g]) t = std::max(t, a);
    double end = t + inst_.groups[g].work_s;
    for (std::size_t h = g + 1; h < inst_.groups.size(); ++h) {
      end = std::max(end, inst_.groups[h].ready_s) + inst_.groups[h].work_s;
    }
    double back = 0.0;
    for (std::size_t a : inst_.groups.back().sites) {
      back = std::max(back, dist_[a * inst_.sites.size()] / max_speed_ * 3600.0);
    }
    return end + back;
  }

  bool identical_idle(std::size_t r, std::size_t other) const {
    const auto& a = inst_.uavs[r];
    const auto& b = inst_.uavs[other];
    return !fleet_[other].used && a.speed_kmh == b.speed_kmh && a.per_km_draw == b.per_km_draw &&
           a.available_s == b.available_s;
  }

  // Can a UAV at `site` with `battery` still reach a place to recharge or land.
  bool can_get_home(std::size_t r, std::size_t site, double battery) const {
    if (battery + kEps >= drain(r, site, 0)) return true;
    for (std::size_t h : swaps_) {
      if (!swap_used_[h] && battery + kEps >= drain(r, site, h)) return true;
    }
    return false;
  }

  void finish_group(std::size_t g) {
    double start = group_start(g);
    for (double a : arrivals_[g]) start = std::max(start, a);
    ends_[g] = start + inst_.groups[g].work_s;
    for (std::size_t r : group_uavs_[g]) {
      auto& st = fleet_[r];
      st.visits.back().depart_s = ends_[g];
      st.battery = st.visits.back().battery_arrive - inst_.work_draw(r, g);
      st.visits.back().battery_depart = st.battery;
      st.free_s = ends_[g];
    }
  }

  void leaf() {
    double objective = 0.0;
    std::vector<UavRoute> routes(inst_.uavs.size());
    for (std::size_t r = 0; r < inst_.uavs.size(); ++r) {
      routes[r].uav = r;
      const auto& st = fleet_[r];
      if (!st.used) continue;
      const double battery = st.battery - drain(r, st.pos, 0);
      if (battery < -kEps) return;
      routes[r].visits = st.visits;
      Visit home;
      home.site = 0;
      home.arrive_s = st.free_s + seconds(r, st.pos, 0);
      home.depart_s = home.arrive_s;
      home.battery_arrive = std::max(0.0, battery);
      home.battery_depart = 1.0;
      routes[r].visits.push_back(home);
      objective = std::max(objective, home.arrive_s);
    }
    if (objective < best_ - kEps) {
      best_ = objective;
      best_routes_ = std::move(routes);
    }
  }

  void search(std::size_t depth) {
    if (aborted_) return;
    if (++nodes_ > inst_.node_budget) {
      aborted_ = true;
      return;
    }
    if (depth == flat_.size()) {
      leaf();
      return;
    }
    const auto [g, site] = flat_[depth];
    if (lower_bound(g) >= best_ - kEps) return;

    const double start = group_start(g);
    std::vector<Option> options;
    for (std::size_t r = 0; r < inst_.uavs.size(); ++r) {
      if (std::find(group_uavs_[g].begin(), group_uavs_[g].end(), r) != group_uavs_[g].end()) {
        continue;
      }
      if (!fleet_[r].used) {
        bool twin = false;
        for (std::size_t o = 0; o < r && !twin; ++o) twin = identical_idle(r, o);
        if (twin) continue;
      }
      const auto& st = fleet_[r];
      const double rho = inst_.work_draw(r, g);
      // Direct leg.
      {
        const double b = st.battery - drain(r, st.pos, site);
        if (b >= -kEps && b - rho >= -kEps && can_get_home(r, site, b - rho)) {
          const double arrive = std::max(st.free_s + seconds(r, st.pos, site), start);
          options.push_back({r, kNone, arrive, b, 0.0, 0.0});
        }
      }
      // Via a battery-swap site; never straight out of a warehouse.
      if (st.used) {
        for (std::size_t h : swaps_) {
          if (swap_used_[h]) continue;
          const double bh = st.battery - drain(r, st.pos, h);
          if (bh < -kEps) continue;
          const double b = 1.0 - drain(r, h, site);
          if (b < -kEps || b - rho < -kEps) continue;
          const double at_h = st.free_s + seconds(r, st.pos, h);
          const double arrive = std::max(at_h + inst_.sites[h].swap_duration_s + seconds(r, h, site),
                                         start);
          options.push_back({r, h, arrive, b, at_h, bh});
        }
      }
    }
    if (options.empty()) {
      deepest_ = std::max(deepest_, depth);
      return;
    }
    deepest_ = std::max(deepest_, depth + 1);
    std::stable_sort(options.begin(), options.end(), [](const Option& a, const Option& b) {
      return a.arrive < b.arrive;
    });

    for (const auto& opt : options) {
      auto& st = fleet_[opt.uav];
      const FleetState saved = st;
      if (!st.used) {
        Visit home;
        home.site = 0;
        home.arrive_s = st.free_s;
        home.battery_arrive = 1.0;
        home.battery_depart = 1.0;
        st.visits.push_back(home);
        st.used = true;
      }
      if (opt.swap == kNone) {
        st.visits.back().depart_s = opt.arrive - seconds(opt.uav, st.pos, site);
      } else {
        st.visits.back().depart_s = st.free_s;
        Visit swap;
        swap.site = opt.swap;
        swap.arrive_s = opt.swap_arrive;
        swap.depart_s = opt.arrive - seconds(opt.uav, opt.swap, site);
        swap.battery_arrive = std::max(0.0, opt.swap_battery);
        swap.battery_depart = 1.0;
        st.visits.push_back(swap);
        swap_used_[opt.swap] = 1;
      }
      Visit at;
      at.site = site;
      at.arrive_s = opt.arrive;
      at.depart_s = opt.arrive;
      at.battery_arrive = std::max(0.0, opt.battery_arrive);
      at.battery_depart = at.battery_arrive;
      st.visits.push_back(at);
      st.pos = site;
      group_uavs_[g].push_back(opt.uav);
      arrivals_[g].push_back(opt.arrive);

      const bool closes_group = group_uavs_[g].size() == inst_.groups[g].sites.size();
      std::vector<FleetState> before_finish;
      if (closes_group) {
        for (std::size_t r : group_uavs_[g]) before_finish.push_back(fleet_[r]);
        finish_group(g);
      }
      search(depth + 1);
      if (closes_group) {
        for (std::size_t i = 0; i < group_uavs_[g].size(); ++i) {
          fleet_[group_uavs_[g][i]] = before_finish[i];
        }
        ends_[g] = 0.0;
      }
      group_uavs_[g].pop_back();
      arrivals_[g].pop_back();
      if (opt.swap != kNone) swap_used_[opt.swap] = 0;
      fleet_[opt.uav] = saved;
      if (aborted_) return;
    }
  }

  const RoutingInstance& inst_;
  std::vector<double> dist_;
  std::vector<std::size_t> swaps_;
  std::vector<std::pair<std::size_t, std::size_t>> flat_;  // (group, site)
  double max_speed_ = 0.0;
  std::vector<FleetState> fleet_;
  std::vector<std::uint8_t> swap_used_;
  std::vector<std::vector<std::size_t>> group_uavs_;
  std::vector<std::vector<double>> arrivals_;
  std::vector<double> ends_;
  double best_ = kInf;
  std::vector<UavRoute> best_routes_;
  std::size_t nodes_ = 0;
  std::size_t deepest_ = 0;
  bool aborted_ = false;
};

}  // namespace

RouteSolution solve_routing(const RoutingInstance& inst) { return RouteSearch(inst).run(); }

std::vector<std::string> validate_route(const RoutingInstance& inst, const RouteSolution& sol) {
  std::vector<std::string> issues;
  auto fail = [&](const std::string& family, const std::string& what) {
    issues.push_back(family + ": " + what);
  };
  const double tol = 1e-6;
  const std::size_t n = inst.sites.size();
  std::vector<std::size_t> visits(n, 0);
  // site -> (uav, arrive, depart)
  struct Stay {
    std::size_t uav;
    double arrive;
    double depart;
  };
  std::vector<std::vector<Stay>> stays(n);
  double last_return = 0.0;

  auto is_warehouse = [&](std::size_t a) { return inst.sites[a].kind != SiteKind::deployment; };

  for (const auto& route : sol.routes) {
    if (route.visits.empty()) continue;
    if (route.uav >= inst.uavs.size()) {
      fail("path", "route names an unknown UAV");
      continue;
    }
    const auto& uav = inst.uavs[route.uav];
    const std::string who = "UAV " + uav.id;
    const auto& v = route.visits;
    if (v.front().site != 0 || v.back().site != 0 || v.size() < 2) {
      fail("path", who + " route must start and end at the set-off site");
    }
    if (v.front().depart_s + tol < uav.available_s) {
      fail("timing", who + " departs before it is available");
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto& x = v[i];
      if (x.site >= n) {
        fail("path", who + " visits an unknown site");
        return issues;
      }
      if (i > 0 && i + 1 < v.size() && x.site == 0) {
        fail("path", who + " passes through the set-off site mid-route");
      }
      if (x.arrive_s < -tol || x.depart_s < -tol) fail("timing", who + " has a negative time");
      if (x.battery_arrive < -tol || x.battery_arrive > 1.0 + tol || x.battery_depart < -tol ||
          x.battery_depart > 1.0 + tol) {
        fail("battery", who + " battery outside [0, 1] at " + inst.sites[x.site].id);
      }
      if (x.depart_s + tol < x.arrive_s) {
        fail("timing", who + " leaves " + inst.sites[x.site].id + " before arriving");
      }
      const SiteKind kind = inst.sites[x.site].kind;
      if (i + 1 < v.size() || i == 0) {
        if (kind != SiteKind::deployment && std::abs(x.battery_depart - 1.0) > tol) {
          fail("battery", who + " leaves warehouse " + inst.sites[x.site].id + " without a full battery");
        }
      }
      if (kind == SiteKind::battery_swap &&
          x.depart_s + tol < x.arrive_s + inst.sites[x.site].swap_duration_s) {
        fail("timing", who + " leaves swap site " + inst.sites[x.site].id + " before the swap ends");
      }
      if (kind == SiteKind::deployment) {
        const std::size_t g = inst.sites[x.site].group;
        if (g >= inst.groups.size()) {
          fail("workgroup", "site " + inst.sites[x.site].id + " belongs to no workgroup");
        } else {
          const double rho = inst.work_draw(route.uav, g);
          if (std::abs(x.battery_arrive - rho - x.battery_depart) > tol) {
            fail("battery", who + " work draw mismatch at " + inst.sites[x.site].id);
          }
        }
      }
      if (i > 0 || x.site != 0) ++visits[x.site];
      if (i > 0 && x.site != 0) stays[x.site].push_back({route.uav, x.arrive_s, x.depart_s});
      if (i + 1 < v.size()) {
        const auto& y = v[i + 1];
        if (y.site >= n) continue;
        if (is_warehouse(x.site) && is_warehouse(y.site)) {
          fail("path", who + " flies warehouse to warehouse " + inst.sites[x.site].id + " -> " +
                          inst.sites[y.site].id);
        }
        const double d = inst.distance_km(x.site, y.site);
        const double flight = d / uav.speed_kmh * 3600.0;
        if (std::abs(x.depart_s + flight - y.arrive_s) > tol) {
          std::ostringstream msg;
          msg << who << " leg " << inst.sites[x.site].id << " -> " << inst.sites[y.site].id
              << " arrives at " << y.arrive_s << " s, expected " << x.depart_s + flight << " s";
          fail("timing", msg.str());
        }
        if (std::abs(x.battery_depart - d * uav.per_km_draw - y.battery_arrive) > tol) {
          std::ostringstream msg;
          msg << who << " battery on leg " << inst.sites[x.site].id << " -> "
              << inst.sites[y.site].id << " is " << y.battery_arrive << ", expected "
              << x.battery_depart - d * uav.per_km_draw;
          fail("battery", msg.str());
        }
      }
    }
    last_return = std::max(last_return, v.back().arrive_s);
  }
  visits[0] = 0;
  for (std::size_t a = 1; a < n; ++a) {
    const auto kind = inst.sites[a].kind;
    if (kind == SiteKind::deployment && inst.sites[a].group != kNone && visits[a] != 1) {
      fail("path", "deployment site " + inst.sites[a].id + " visited " + std::to_string(visits[a]) +
                      " times");
    }
    if (kind == SiteKind::battery_swap && visits[a] > 1) {
      fail("path", "swap site " + inst.sites[a].id + " visited more than once");
    }
  }
  double previous_end = 0.0;
  for (std::size_t g = 0; g < inst.groups.size(); ++g) {
    const auto& group = inst.groups[g];
    std::set<std::size_t> uavs;
    double latest_arrival = 0.0;
    double earliest_depart = kInf;
    for (std::size_t a : group.sites) {
      for (const auto& st : stays[a]) {
        if (!uavs.insert(st.uav).second) {
          fail("workgroup", "a UAV works twice in workgroup " + std::to_string(g));
        }
        latest_arrival = std::max(latest_arrival, st.arrive);
        earliest_depart = std::min(earliest_depart, st.depart);
        if (st.arrive + tol < group.ready_s) {
          std::ostringstream msg;
          msg << "arrival at " << inst.sites[a].id << " precedes the station ready time by "
              << group.ready_s - st.arrive << " s";
          fail("ready", msg.str());
        }
        if (st.arrive + tol < previous_end) {
          std::ostringstream msg;
          msg << "arrival at " << inst.sites[a].id << " precedes the end of the previous workgroup by "
              << previous_end - st.arrive << " s";
          fail("workgroup", msg.str());
        }
      }
    }
    if (std::isfinite(earliest_depart) && earliest_depart + tol < latest_arrival + group.work_s) {
      std::ostringstream msg;
      msg << "workgroup " << g << " departs " << latest_arrival + group.work_s - earliest_depart
          << " s before its joint work ends";
      fail("workgroup", msg.str());
    }
    if (std::isfinite(earliest_depart)) {
      previous_end = std::max(previous_end, latest_arrival + group.work_s);
    }
  }
  if (sol.feasible && std::abs(last_return - sol.objective_s) > tol) {
    std::ostringstream msg;
    msg << "objective " << sol.objective_s << " s differs from the last return " << last_return
        << " s";
    fail("objective", msg.str());
  }
  return issues;
}

}  // namespace ptin::uav
