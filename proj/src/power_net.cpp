#include "ptin/power_net.hpp"

#include <algorithm>
#include <deque>

namespace ptin::power {

namespace {

bool line_usable(const PdnState& pdn, const PdnLine& line) {
  return line.switch_closed && line.equipment_ok && pdn.buses[line.from].equipment_ok &&
         pdn.buses[line.to].equipment_ok;
}

bool is_feeding(const PdnBus& bus) {
  return bus.equipment_ok && (bus.is_source || (bus.is_v2gs && bus.station_online));
}

// Incident closed, healthy lines per bus.
std::vector<std::vector<std::size_t>> closed_incidence(const PdnState& pdn) {
  std::vector<std::vector<std::size_t>> inc(pdn.buses.size());
  for (std::size_t k = 0; k < pdn.lines.size(); ++k) {
    const auto& line = pdn.lines[k];
    if (!line_usable(pdn, line)) continue;
    inc[line.from].push_back(k);
    inc[line.to].push_back(k);
  }
  return inc;
}

// Lines of the loop closed by a back edge found during DFS of a component.
std::vector<std::size_t> find_cycle(const PdnState& pdn,
                                    const std::vector<std::vector<std::size_t>>& inc,
                                    std::size_t root) {
  const std::size_t n = pdn.buses.size();
  std::vector<std::size_t> parent_line(n, kNone);
  std::vector<std::size_t> parent_bus(n, kNone);
  std::vector<std::uint8_t> seen(n, 0);
  struct Frame {
    std::size_t bus;
    std::size_t next;
  };
  std::vector<Frame> stack{{root, 0}};
  seen[root] = 1;
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.next == inc[top.bus].size()) {
      stack.pop_back();
      continue;
    }
    const std::size_t k = inc[top.bus][top.next++];
    if (k == parent_line[top.bus]) continue;
    const std::size_t v = pdn.lines[k].other(top.bus);
    if (!seen[v]) {
      seen[v] = 1;
      parent_line[v] = k;
      parent_bus[v] = top.bus;
      stack.push_back({v, 0});
      continue;
    }
    // Back edge top.bus -> v: walk up from top.bus until v.
    std::vector<std::size_t> loop{k};
    for (std::size_t u = top.bus; u != v && u != kNone; u = parent_bus[u]) {
      loop.push_back(parent_line[u]);
    }
    std::sort(loop.begin(), loop.end());
    return loop;
  }
  return {};
}

}  // namespace

std::vector<std::size_t> active_sources(const PdnState& pdn) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pdn.buses.size(); ++i) {
    if (is_feeding(pdn.buses[i])) out.push_back(i);
  }
  return out;
}

std::vector<std::uint8_t> energization_sweep(const PdnState& pdn,
                                             std::span<const std::size_t> sources) {
  const auto inc = closed_incidence(pdn);
  std::vector<std::uint8_t> energized(pdn.buses.size(), 0);
  std::deque<std::size_t> queue;
  for (std::size_t s : sources) {
    if (!pdn.buses[s].equipment_ok || energized[s]) continue;
    energized[s] = 1;
    queue.push_back(s);
  }
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t k : inc[u]) {
      const std::size_t v = pdn.lines[k].other(u);
      if (!energized[v]) {
        energized[v] = 1;
        queue.push_back(v);
      }
    }
  }
  return energized;
}

bool apply_energization(PdnState& pdn) {
  const auto sources = active_sources(pdn);
  const auto energized = energization_sweep(pdn, sources);
  bool changed = false;
  for (std::size_t i = 0; i < pdn.buses.size(); ++i) {
    auto& bus = pdn.buses[i];
    const bool e = energized[i] != 0;
    if (bus.energized != e) {
      bus.energized = e;
      changed = true;
    }
    if (!e && bus.load_switch_closed) {
      bus.load_switch_closed = false;
      changed = true;
    }
  }
  return changed;
}

RadialityReport check_radiality(const PdnState& pdn) {
  const std::size_t n = pdn.buses.size();
  const auto inc = closed_incidence(pdn);
  std::vector<std::uint8_t> seen(n, 0);
  RadialityReport report;
  for (std::size_t root = 0; root < n; ++root) {
    if (seen[root] || !pdn.buses[root].energized) continue;
    std::vector<std::size_t> members;
    std::size_t line_ends = 0;
    std::deque<std::size_t> queue{root};
    seen[root] = 1;
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      members.push_back(u);
      line_ends += inc[u].size();
      for (std::size_t k : inc[u]) {
        const std::size_t v = pdn.lines[k].other(u);
        if (!seen[v]) {
          seen[v] = 1;
          queue.push_back(v);
        }
      }
    }
    std::sort(members.begin(), members.end());
    const std::size_t lines = line_ends / 2;
    std::vector<std::size_t> roots;
    for (std::size_t b : members) {
      if (is_feeding(pdn.buses[b])) roots.push_back(b);
    }
    // One unit of commodity is absorbed by every non-root bus; the flow is
    // feasible without circulation iff the closed lines number exactly that.
    if (lines + 1 > members.size()) {
      report.radial = false;
      report.witness = Witness::cycle;
      report.lines = find_cycle(pdn, inc, root);
      report.buses = members;
      return report;
    }
    if (roots.size() > 1) {
      report.radial = false;
      report.witness = Witness::multi_source;
      report.buses = roots;
      return report;
    }
    if (roots.empty()) {
      report.radial = false;
      report.witness = Witness::unfed;
      report.buses = members;
      return report;
    }
  }
  return report;
}

ControlCheck control_feasible(const PdnLine& line, SwitchAction action,
                              std::span<const std::uint8_t> bus_comm) {
  if (!line.equipment_ok) return {false, "line " + line.id + " is faulted"};
  const bool ci = bus_comm[line.from] != 0;
  const bool cj = bus_comm[line.to] != 0;
  if (action == SwitchAction::close) {
    if (line.switch_closed) return {false, "line " + line.id + " is already closed"};
    if (ci && cj) return {true, {}};
    return {false, "closing " + line.id + " needs communication at both end buses"};
  }
  if (!line.switch_closed) return {false, "line " + line.id + " is already open"};
  if ((line.control_from && ci) || (line.control_to && cj)) return {true, {}};
  return {false, "opening " + line.id + " needs communication at a controlling FTU"};
}

bool close_keeps_radial(const PdnState& pdn, std::size_t line_index) {
  const auto& line = pdn.lines[line_index];
  if (line.switch_closed || !line.equipment_ok) return false;
  if (!pdn.buses[line.from].equipment_ok || !pdn.buses[line.to].equipment_ok) return false;
  const auto inc = closed_incidence(pdn);
  std::vector<std::uint8_t> seen(pdn.buses.size(), 0);
  std::size_t buses = 0;
  std::size_t line_ends = 0;
  std::size_t feeders = 0;
  for (std::size_t start : {line.from, line.to}) {
    if (seen[start]) return false;  // both ends already connected: a loop
    std::deque<std::size_t> queue{start};
    seen[start] = 1;
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      ++buses;
      line_ends += inc[u].size();
      const auto& bus = pdn.buses[u];
      if (bus.is_source || bus.is_v2gs) ++feeders;
      for (std::size_t k : inc[u]) {
        const std::size_t v = pdn.lines[k].other(u);
        if (!seen[v]) {
          seen[v] = 1;
          queue.push_back(v);
        }
      }
    }
  }
  const std::size_t lines_after = line_ends / 2 + 1;
  return feeders <= 1 && lines_after + 1 == buses;
}

CommitResult station_step_commit(const StationBalance& balance, double step_load_kw,
                                 double tolerance) {
  if (balance.residual_kw() + tolerance < step_load_kw) return {false, balance};
  StationBalance next = balance;
  next.picked_up_kw += step_load_kw;
  return {true, next};
}

}  // namespace ptin::power
