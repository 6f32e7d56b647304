#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "ptin/comm_net.hpp"
#include "ptin/power_net.hpp"

namespace ptin::oracle {

namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double range(double lo, double hi) { return lo + (hi - lo) * unit(); }
  std::size_t below(std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(unit() * static_cast<double>(n)));
  }
  bool chance(double p) { return unit() < p; }
  Point point(double half) { return snap({range(-half, half), range(-half, half)}); }

 private:
  std::mt19937_64 gen_;
};

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void miss(SuiteReport& r, std::size_t i, const std::string& what) {
  if (r.counterexample.empty()) r.counterexample = "instance " + std::to_string(i) + ": " + what;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

dispatch::DispatchInstance random_dispatch(Rng& rng) {
  dispatch::DispatchInstance inst;
  const std::size_t V = 1 + rng.below(6);
  const std::size_t S = 1 + rng.below(3);
  static const double outputs[] = {25.0, 50.0, 50.0, 75.0, 100.0, 500.0};
  for (std::size_t v = 0; v < V; ++v) {
    const double out = outputs[rng.below(6)];
    inst.vehicles.push_back({"v" + std::to_string(v),
                             out >= 500.0 ? VehicleKind::mess : VehicleKind::ev, out});
  }
  static const double reqs[] = {0.0, 25.0, 50.0, 100.0, 150.0, 400.0, 550.0};
  for (std::size_t s = 0; s < S; ++s) {
    inst.stations.push_back({"s" + std::to_string(s), reqs[rng.below(7)]});
  }
  for (std::size_t i = 0; i < V * S; ++i) {
    inst.travel_s.push_back(rng.chance(0.1) ? std::numeric_limits<double>::infinity()
                                            : 30.0 * static_cast<double>(1 + rng.below(20)));
  }
  inst.expected_capacity = rng.chance(0.2);
  inst.eta = 0.3;
  return inst;
}

uav::RoutingInstance random_routing(Rng& rng) {
  uav::RoutingInstance inst;
  const std::size_t R = 1 + rng.below(2);
  for (std::size_t r = 0; r < R; ++r) {
    const double speed = rng.chance(0.5) ? 180.0 : rng.range(120.0, 200.0);
    const double budget = rng.range(25.0, 60.0);
    inst.uavs.push_back({"u" + std::to_string(r), speed, 1.0 / budget,
                         rng.chance(0.5) ? 0.0 : std::round(rng.range(0.0, 300.0))});
  }
  inst.sites.push_back({"home", uav::SiteKind::set_off, rng.point(3.0), kNone, 0.0});
  const std::size_t D = 1 + rng.below(4);
  std::size_t g = 0;
  std::size_t in_group = 0;
  for (std::size_t d = 0; d < D; ++d) {
    if (inst.groups.empty() || in_group == R || rng.chance(0.5)) {
      uav::Workgroup wg;
      wg.ready_s = rng.chance(0.3) ? 0.0 : std::round(rng.range(0.0, 1200.0));
      wg.work_s = std::round(rng.range(60.0, 300.0));
      inst.groups.push_back(wg);
      g = inst.groups.size() - 1;
      in_group = 0;
    }
    inst.groups[g].sites.push_back(inst.sites.size());
    inst.sites.push_back({"d" + std::to_string(d), uav::SiteKind::deployment, rng.point(12.0), g,
                          0.0});
    ++in_group;
  }
  if (rng.chance(0.6)) {
    inst.sites.push_back({"swap", uav::SiteKind::battery_swap, rng.point(8.0), kNone,
                          std::round(rng.range(0.0, 120.0))});
  }
  inst.hover_equiv_kmh = 60.0;
  inst.node_budget = 2000000;
  return inst;
}

uav::UdssfInstance random_udssf(Rng& rng) {
  uav::UdssfInstance inst;
  CnNode central;
  central.id = "c0";
  central.pos = {0.0, 0.0};
  central.range_km = 3.0;
  central.is_central = true;
  central.energized = true;
  inst.nodes.push_back(central);
  const std::size_t extra = 1 + rng.below(4);
  for (std::size_t a = 0; a < extra; ++a) {
    CnNode n;
    n.id = "n" + std::to_string(a);
    n.pos = rng.point(6.0);
    n.range_km = 3.0;
    n.energized = rng.chance(0.5);
    inst.nodes.push_back(n);
  }
  // Comm flags as the library would hold them before any UAV is placed.
  const auto comm = comm_reachability(inst.nodes);
  for (std::size_t a = 0; a < inst.nodes.size(); ++a) inst.nodes[a].comm = comm[a] != 0;
  const std::size_t B = 2 + rng.below(4);
  for (std::size_t b = 0; b < B; ++b) inst.buses.push_back(rng.point(6.0));
  const std::size_t T = 1 + rng.below(2);
  for (std::size_t t = 0; t < T; ++t) {
    const std::size_t a = rng.below(B);
    std::size_t b = rng.below(B);
    if (b == a) b = (a + 1) % B;
    PdnLine line;
    line.from = a;
    line.to = b;
    line.control_from = true;
    line.control_to = rng.chance(0.5);
    const double pick = rng.unit();
    if (pick < 0.5) {
      inst.targets.push_back(uav::close_requirement(line));
    } else if (pick < 0.75) {
      inst.targets.push_back(uav::open_requirement(line));
    } else {
      inst.targets.push_back(uav::bus_requirement(a));
    }
  }
  const std::size_t C = 3 + rng.below(6);
  for (std::size_t c = 0; c < C; ++c) inst.candidates.push_back(rng.point(6.0));
  inst.uav_range_km = 1.0 + 0.5 * static_cast<double>(rng.below(3));
  inst.subset_cap = C;
  return inst;
}

}  // namespace

SuiteReport dispatch_suite(std::size_t count, std::uint64_t seed) {
  SuiteReport rep;
  rep.name = "dispatch";
  const auto t0 = Clock::now();
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const auto inst = random_dispatch(rng);
    const auto sol = dispatch::solve(inst);
    const auto ref = dispatch_exhaustive(inst);
    ++rep.total;
    if (sol.feasible != ref.has_value()) {
      miss(rep, i, std::string("solver feasible=") + (sol.feasible ? "yes" : "no") +
                       ", exhaustive disagrees");
      continue;
    }
    if (ref && std::abs(sol.objective_s - *ref) > 1e-9) {
      miss(rep, i, "objective " + num(sol.objective_s) + " vs exhaustive " + num(*ref));
      continue;
    }
    if (sol.feasible) {
      const auto v = dispatch::validate(inst, sol);
      if (!v.empty()) {
        miss(rep, i, "validator: " + v.front());
        continue;
      }
    }
    ++rep.matched;
  }
  rep.seconds = since(t0);
  return rep;
}

SuiteReport routing_suite(std::size_t count, std::uint64_t seed) {
  SuiteReport rep;
  rep.name = "routing";
  const auto t0 = Clock::now();
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const auto inst = random_routing(rng);
    const auto sol = uav::solve_routing(inst);
    const auto ref = routing_exhaustive(inst);
    ++rep.total;
    if (sol.feasible != ref.has_value()) {
      miss(rep, i, std::string("solver feasible=") + (sol.feasible ? "yes" : "no") +
                       " (" + sol.failure + "), exhaustive disagrees");
      continue;
    }
    if (ref && std::abs(sol.objective_s - *ref) > 1e-6) {
      miss(rep, i, "objective " + num(sol.objective_s) + " vs exhaustive " + num(*ref));
      continue;
    }
    if (sol.feasible) {
      const auto v = uav::validate_route(inst, sol);
      if (!v.empty()) {
        miss(rep, i, "validator: " + v.front());
        continue;
      }
    }
    ++rep.matched;
  }
  rep.seconds = since(t0);
  return rep;
}

SuiteReport connectivity_suite(const Scenario& s, std::size_t count, std::uint64_t seed) {
  SuiteReport rep;
  rep.name = "connectivity";
  const auto t0 = Clock::now();
  Rng rng(seed);
  std::vector<Point> buses;
  for (const auto& b : s.pdn.buses) buses.push_back(b.pos);
  for (std::size_t i = 0; i < count; ++i) {
    auto nodes = s.cn;
    for (auto& n : nodes) n.energized = rng.chance(n.is_central ? 0.8 : 0.7);
    const auto cov = comm::coverage_pairs(nodes, buses, {});
    const auto cert = comm::solve_connectivity(nodes, cov);
    const auto ref = comm_reachability(nodes);
    ++rep.total;
    if (cert.comm != ref) {
      miss(rep, i, "comm flags differ from reachability");
      continue;
    }
    const auto v = comm::validate_certificate(nodes, cov, cert);
    if (!v.empty()) {
      miss(rep, i, "certificate: " + v.front());
      continue;
    }
    std::size_t on = 0;
    std::size_t roots = 0;
    for (std::size_t a = 0; a < nodes.size(); ++a) {
      on += ref[a];
      roots += ref[a] && nodes[a].is_central;
    }
    if (cert.links.size() != on - roots) {
      miss(rep, i, "radial identity: " + std::to_string(cert.links.size()) + " links for " +
                       std::to_string(on) + " comm nodes and " + std::to_string(roots) + " roots");
      continue;
    }
    const auto bus_ref = covered_buses(nodes, ref, buses);
    if (comm::derive_bus_comm(cov, cert.comm) != bus_ref) {
      miss(rep, i, "bus comm differs from brute-force coverage");
      continue;
    }
    ++rep.matched;
  }
  rep.seconds = since(t0);
  return rep;
}

SuiteReport radiality_suite(const Scenario& s, std::size_t count, std::uint64_t seed) {
  SuiteReport rep;
  rep.name = "radiality";
  const auto t0 = Clock::now();
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    PdnState pdn = s.pdn;
    for (auto& l : pdn.lines) {
      l.equipment_ok = rng.chance(0.95);
      l.switch_closed = l.equipment_ok && rng.chance(0.8);
    }
    for (auto& b : pdn.buses) {
      if (b.is_source) b.equipment_ok = rng.chance(0.9);
      if (b.is_v2gs) b.station_online = rng.chance(0.4);
    }
    const auto on = power::energization_sweep(pdn, power::active_sources(pdn));
    for (std::size_t b = 0; b < pdn.buses.size(); ++b) pdn.buses[b].energized = on[b];
    const auto rep_lib = power::check_radiality(pdn);
    const bool ref = radial_union_find(pdn);
    ++rep.total;
    if (rep_lib.radial != ref) {
      miss(rep, i, std::string("commodity-flow check says ") +
                       (rep_lib.radial ? "radial" : "not radial") + ", union-find disagrees");
      continue;
    }
    if (on != energized_bfs(pdn)) {
      miss(rep, i, "energization sweep differs from BFS");
      continue;
    }
    ++rep.matched;
  }
  rep.seconds = since(t0);
  return rep;
}

SuiteReport udssf_suite(std::size_t count, std::uint64_t seed) {
  SuiteReport rep;
  rep.name = "udssf";
  const auto t0 = Clock::now();
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const auto inst = random_udssf(rng);
    const auto res = uav::solve_udssf(inst);
    const auto ref = udssf_exhaustive(inst);
    ++rep.total;
    if (res.solved != ref.has_value()) {
      miss(rep, i, std::string("solver solved=") + (res.solved ? "yes" : "no") +
                       ", exhaustive disagrees");
      continue;
    }
    if (ref && res.sites.size() != *ref) {
      miss(rep, i, "solver used " + std::to_string(res.sites.size()) + " sites, minimum is " +
                       std::to_string(*ref));
      continue;
    }
    if (res.solved && !udssf_sites_work(inst, res.sites)) {
      miss(rep, i, "returned sites do not meet the targets");
      continue;
    }
    ++rep.matched;
  }
  rep.seconds = since(t0);
  return rep;
}

}  // namespace ptin::oracle
