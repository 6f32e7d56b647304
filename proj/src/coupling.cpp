#include "ptin/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ptin/comm_net.hpp"
#include "ptin/power_net.hpp"
#include "ptin/traffic_net.hpp"

namespace ptin {

namespace {

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

bool facility_powered(const PdnState& pdn, std::size_t supply_bus) {
  if (supply_bus == kNone) return true;
  const auto& bus = pdn.buses[supply_bus];
  return bus.equipment_ok && bus.energized && bus.load_switch_closed;
}

int refresh_coupled_state(Scenario& s) {
  int sweeps = 0;
  while (true) {
    ++sweeps;
    bool changed = power::apply_energization(s.pdn);

    for (auto& node : s.cn) {
      if (node.is_uav_backed && node.supply_bus == kNone) continue;
      const bool e = facility_powered(s.pdn, node.supply_bus);
      changed |= node.energized != e;
      node.energized = e;
    }
    for (auto& j : s.utn.junctions) {
      const bool e = facility_powered(s.pdn, j.supply_bus);
      changed |= j.energized != e;
      j.energized = e;
    }
    for (auto& l : s.utn.lanes) {
      const bool e = facility_powered(s.pdn, l.supply_bus);
      changed |= l.energized != e;
      l.energized = e;
    }
    changed |= traffic::update_speed_limits(s.utn, s.params);

    std::vector<Point> bus_pos;
    bus_pos.reserve(s.pdn.buses.size());
    for (const auto& b : s.pdn.buses) bus_pos.push_back(b.pos);
    std::vector<Point> ev_pos;
    ev_pos.reserve(s.fleets.vehicles.size());
    for (const auto& v : s.fleets.vehicles) ev_pos.push_back(v.pos);
    const auto cov = comm::coverage_pairs(s.cn, bus_pos, ev_pos);
    const auto conn = comm::solve_connectivity(s.cn, cov);
    for (std::size_t a = 0; a < s.cn.size(); ++a) {
      const bool c = conn.comm[a] != 0;
      changed |= s.cn[a].comm != c;
      s.cn[a].comm = c;
    }
    const auto bus_comm = comm::derive_bus_comm(cov, conn.comm);
    for (std::size_t i = 0; i < s.pdn.buses.size(); ++i) {
      const bool c = bus_comm[i] != 0;
      changed |= s.pdn.buses[i].comm != c;
      s.pdn.buses[i].comm = c;
    }
    const auto ev_comm = comm::derive_ev_comm(cov, conn.comm);
    for (std::size_t z = 0; z < s.fleets.vehicles.size(); ++z) {
      auto& v = s.fleets.vehicles[z];
      // MESSs use satellite links and never depend on CN coverage.
      const bool c = v.kind == VehicleKind::mess || ev_comm[z] != 0;
      changed |= v.comm != c;
      v.comm = c;
    }
    if (!changed || sweeps > 64) break;
  }
  return sweeps;
}

Scenario apply_damage(const Scenario& s, const DamageSet& d) {
  std::vector<std::string> issues;
  Scenario out = s;
  for (const auto& id : d.lines) {
    const auto k = out.find_line(id);
    if (!k) {
      issues.push_back("damage names unknown line '" + id + "'");
      continue;
    }
    out.pdn.lines[*k].equipment_ok = false;
    out.pdn.lines[*k].switch_closed = false;
  }
  for (const auto& id : d.buses) {
    const auto i = out.find_bus(id);
    if (!i) {
      issues.push_back("damage names unknown bus '" + id + "'");
      continue;
    }
    out.pdn.buses[*i].equipment_ok = false;
  }
  if (!issues.empty()) throw ScenarioError(std::move(issues));
  refresh_coupled_state(out);
  return out;
}

std::vector<std::size_t> dispatchable_evs(const Scenario& s) {
  std::vector<std::size_t> out;
  for (std::size_t z = 0; z < s.fleets.vehicles.size(); ++z) {
    const auto& v = s.fleets.vehicles[z];
    if (v.kind == VehicleKind::mess || (v.comm && v.participates)) out.push_back(z);
  }
  return out;
}

void draw_participation(std::vector<Vehicle>& vehicles, double eta, ParticipationMode mode,
                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> evs;
  for (std::size_t z = 0; z < vehicles.size(); ++z) {
    if (vehicles[z].kind == VehicleKind::ev) evs.push_back(z);
  }
  if (mode == ParticipationMode::bernoulli) {
    for (std::size_t z : evs) vehicles[z].participates = unit_uniform(rng) < eta;
    return;
  }
  // Fisher-Yates with our own index draw so the selection does not depend on
  // the standard library's distribution implementation.
  for (std::size_t i = evs.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(i));
    std::swap(evs[i - 1], evs[std::min(j, i - 1)]);
  }
  const auto take = static_cast<std::size_t>(std::floor(eta * static_cast<double>(evs.size())));
  for (std::size_t k = 0; k < evs.size(); ++k) vehicles[evs[k]].participates = k < take;
}

std::vector<double> facility_load_per_bus(const Scenario& s) {
  std::vector<double> load(s.pdn.buses.size(), 0.0);
  for (const auto& node : s.cn) {
    if (node.supply_bus != kNone) load[node.supply_bus] += node.demand_kw;
  }
  for (const auto& j : s.utn.junctions) {
    if (j.supply_bus != kNone) load[j.supply_bus] += j.demand_kw;
  }
  for (const auto& l : s.utn.lanes) {
    if (l.supply_bus != kNone) load[l.supply_bus] += l.demand_kw;
  }
  return load;
}

std::vector<std::string> check_coupled_invariants(const Scenario& s) {
  std::vector<std::string> issues;
  for (const auto& bus : s.pdn.buses) {
    if (bus.load_switch_closed && !bus.energized) {
      issues.push_back("bus " + bus.id + " has a closed load switch while de-energized");
    }
  }
  for (const auto& line : s.pdn.lines) {
    if (line.switch_closed && !line.equipment_ok) {
      issues.push_back("faulted line " + line.id + " is closed");
    }
  }
  for (const auto& node : s.cn) {
    if (node.comm && !node.eligible()) {
      issues.push_back("CN node " + node.id + " communicates without power");
    }
    if (node.is_central && node.energized && !node.comm) {
      issues.push_back("energized central node " + node.id + " lacks comm");
    }
  }
  for (const auto& lane : s.utn.lanes) {
    const double expected =
        traffic::facility_limit(lane.energized, lane.prescribed_kmh, lane.degraded_factor);
    if (lane.v_lmax_kmh != expected) issues.push_back("lane " + lane.id + " limit out of date");
    for (const auto& sec : lane.sections) {
      if (sec.speed_kmh > lane.v_lmax_kmh + 1e-9) {
        issues.push_back("lane " + lane.id + " section faster than its limit");
        break;
      }
    }
  }
  for (const auto& j : s.utn.junctions) {
    const double expected =
        traffic::facility_limit(j.energized, j.prescribed_kmh, j.degraded_factor);
    if (j.v_jmax_kmh != expected) issues.push_back("junction " + j.id + " limit out of date");
  }
  const auto rad = power::check_radiality(s.pdn);
  if (!rad.radial) issues.push_back("PDN is not radial");
  return issues;
}

}  // namespace ptin
