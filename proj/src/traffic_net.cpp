#include "ptin/traffic_net.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <queue>

#include "ptin/kernels.hpp"

namespace ptin::traffic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double seconds(double length_km, double speed_kmh) {
  if (length_km <= 0.0) return 0.0;
  return length_km / speed_kmh * 3600.0;
}

bool tight(double lhs, double rhs) {
  return std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, std::abs(rhs));
}

std::vector<std::vector<std::size_t>> out_lanes(const UtnState& utn) {
  std::vector<std::vector<std::size_t>> out(utn.junctions.size());
  for (std::size_t l = 0; l < utn.lanes.size(); ++l) out[utn.lanes[l].from].push_back(l);
  return out;
}

std::vector<std::vector<std::size_t>> in_lanes(const UtnState& utn) {
  std::vector<std::vector<std::size_t>> in(utn.junctions.size());
  for (std::size_t l = 0; l < utn.lanes.size(); ++l) in[utn.lanes[l].to].push_back(l);
  return in;
}

using QueueItem = std::pair<double, std::size_t>;
using MinQueue = std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>>;

}  // namespace

double facility_limit(bool energized, double prescribed_kmh, double degraded_factor) {
  const double e = energized ? 1.0 : 0.0;
  return (e + (1.0 - e) * degraded_factor) * prescribed_kmh;
}

bool update_speed_limits(UtnState& utn, const Params& params) {
  bool changed = false;
  for (auto& lane : utn.lanes) {
    const double v = facility_limit(lane.energized, lane.prescribed_kmh, lane.degraded_factor);
    changed |= v != lane.v_lmax_kmh;
    lane.v_lmax_kmh = v;
  }
  for (auto& j : utn.junctions) {
    const double v = facility_limit(j.energized, j.prescribed_kmh, j.degraded_factor);
    changed |= v != j.v_jmax_kmh;
    j.v_jmax_kmh = v;
  }
  refresh_travel_times(utn, params);
  return changed;
}

void refresh_travel_times(UtnState& utn, const Params& params) {
  std::vector<double> density;
  std::vector<double> free;
  std::vector<double> limit;
  std::vector<double> speed;
  for (auto& lane : utn.lanes) {
    const std::size_t n = lane.sections.size();
    density.resize(n);
    free.assign(n, lane.prescribed_kmh);
    limit.assign(n, lane.v_lmax_kmh);
    speed.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& s = lane.sections[i];
      density[i] = s.length_km > 0.0 ? s.vehicles / s.length_km : 0.0;
    }
    kernels::greenshields(density, free, limit, params.jam_density_veh_per_km,
                          params.speed_floor_kmh, speed);
    lane.travel_time_s = 0.0;
    lane.length_km = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      auto& s = lane.sections[i];
      s.speed_kmh = speed[i];
      s.duration_s = seconds(s.length_km, s.speed_kmh);
      lane.travel_time_s += s.duration_s;
      lane.length_km += s.length_km;
    }
  }
  for (auto& j : utn.junctions) j.crossing_time_s = seconds(j.crossing_length_km, j.v_jmax_kmh);
}

double class_speed(double average_kmh, double prescribed_kmh, VehicleKind kind, double omega) {
  if (kind == VehicleKind::ev) return average_kmh;
  return std::min((1.0 + omega) * average_kmh, std::max(prescribed_kmh, average_kmh));
}

double lane_travel_time(const TrafficLane& lane, VehicleKind kind, double omega_lane) {
  double t = 0.0;
  for (const auto& s : lane.sections) {
    t += seconds(s.length_km, class_speed(s.speed_kmh, lane.prescribed_kmh, kind, omega_lane));
  }
  return t;
}

double junction_crossing_time(const TrafficJunction& junction, VehicleKind kind,
                              double omega_junction) {
  return seconds(junction.crossing_length_km,
                 class_speed(junction.v_jmax_kmh, junction.prescribed_kmh, kind, omega_junction));
}

double edge_time(const UtnState& utn, std::size_t lane, const TravelClass& cls) {
  const auto& l = utn.lanes[lane];
  return lane_travel_time(l, cls.kind, cls.omega_lane) +
         junction_crossing_time(utn.junctions[l.to], cls.kind, cls.omega_junction);
}

PathResult fastest_path(const UtnState& utn, std::size_t origin, std::size_t destination,
                        const TravelClass& cls) {
  PathResult result;
  if (origin == destination) {
    result.reachable = true;
    result.junctions = {origin};
    return result;
  }
  const std::size_t n = utn.junctions.size();
  const auto out = out_lanes(utn);
  std::vector<double> w(utn.lanes.size());
  for (std::size_t l = 0; l < w.size(); ++l) w[l] = edge_time(utn, l, cls);

  std::vector<double> dist(n, kInf);
  dist[origin] = 0.0;
  MinQueue queue;
  queue.push({0.0, origin});
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (d > dist[u]) continue;
    for (std::size_t l : out[u]) {
      const std::size_t v = utn.lanes[l].to;
      const double nd = d + w[l];
      if (nd < dist[v]) {
        dist[v] = nd;
        queue.push({nd, v});
      }
    }
  }
  if (dist[destination] == kInf) return result;

  // Junctions lying on some fastest path to the destination, found by
  // walking tight edges backwards in decreasing distance order.
  std::vector<std::size_t> by_dist;
  for (std::size_t v = 0; v < n; ++v) {
    if (dist[v] <= dist[destination]) by_dist.push_back(v);
  }
  std::sort(by_dist.begin(), by_dist.end(),
            [&](std::size_t a, std::size_t b) { return dist[a] > dist[b]; });
  std::vector<std::uint8_t> leads(n, 0);
  leads[destination] = 1;
  for (std::size_t v : by_dist) {
    if (v == destination) continue;
    for (std::size_t l : out[v]) {
      const std::size_t t = utn.lanes[l].to;
      if (leads[t] && tight(dist[v] + w[l], dist[t])) {
        leads[v] = 1;
        break;
      }
    }
  }

  std::size_t u = origin;
  result.junctions.push_back(u);
  std::vector<std::uint8_t> visited(n, 0);
  visited[u] = 1;
  while (u != destination) {
    std::size_t best_lane = kNone;
    for (std::size_t l : out[u]) {
      const std::size_t t = utn.lanes[l].to;
      if (visited[t] || !leads[t] || !tight(dist[u] + w[l], dist[t])) continue;
      if (best_lane == kNone || t < utn.lanes[best_lane].to) best_lane = l;
    }
    if (best_lane == kNone) break;  // unreachable with positive weights
    u = utn.lanes[best_lane].to;
    visited[u] = 1;
    result.lanes.push_back(best_lane);
    result.junctions.push_back(u);
  }
  result.reachable = u == destination;
  result.time_s = 0.0;
  for (std::size_t l : result.lanes) result.time_s += w[l];
  return result;
}

std::vector<double> times_to(const UtnState& utn, std::size_t destination,
                             const TravelClass& cls) {
  const std::size_t n = utn.junctions.size();
  const auto in = in_lanes(utn);
  std::vector<double> dist(n, kInf);
  dist[destination] = 0.0;
  MinQueue queue;
  queue.push({0.0, destination});
  while (!queue.empty()) {
    const auto [d, v] = queue.top();
    queue.pop();
    if (d > dist[v]) continue;
    for (std::size_t l : in[v]) {
      const std::size_t u = utn.lanes[l].from;
      const double nd = d + edge_time(utn, l, cls);
      if (nd < dist[u]) {
        dist[u] = nd;
        queue.push({nd, u});
      }
    }
  }
  return dist;
}

void advance_traffic(UtnState& utn, const Params& params, double dt_s) {
  const double jam = params.jam_density_veh_per_km;
  const auto out = out_lanes(utn);
  const auto in = in_lanes(utn);

  // Sending and receiving potential of every cell, from the state at the
  // start of the step so updates are order independent.
  std::vector<std::vector<double>> send(utn.lanes.size());
  std::vector<std::vector<double>> space(utn.lanes.size());
  for (std::size_t l = 0; l < utn.lanes.size(); ++l) {
    const auto& lane = utn.lanes[l];
    send[l].resize(lane.sections.size());
    space[l].resize(lane.sections.size());
    for (std::size_t i = 0; i < lane.sections.size(); ++i) {
      const auto& s = lane.sections[i];
      const double frac =
          s.length_km > 0.0 ? std::min(1.0, s.speed_kmh * dt_s / 3600.0 / s.length_km) : 1.0;
      send[l][i] = s.vehicles * frac;
      space[l][i] = std::max(0.0, jam * s.length_km - s.vehicles);
    }
  }

  std::vector<std::vector<double>> delta(utn.lanes.size());
  for (std::size_t l = 0; l < utn.lanes.size(); ++l) {
    delta[l].assign(utn.lanes[l].sections.size(), 0.0);
  }

  // Within a lane: cell i feeds cell i+1.
  for (std::size_t l = 0; l < utn.lanes.size(); ++l) {
    const std::size_t n = utn.lanes[l].sections.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double q = std::min(send[l][i], space[l][i + 1]);
      delta[l][i] -= q;
      delta[l][i + 1] += q;
    }
  }

  // Junctions: incoming tail cells share the junction capacity in proportion
  // to their demand, and each stream splits equally over the outgoing lanes
  // other than the immediate U-turn (kept only when it is the sole exit).
  for (std::size_t m = 0; m < utn.junctions.size(); ++m) {
    if (in[m].empty() || out[m].empty()) continue;
    const auto& jn = utn.junctions[m];
    const double cap_vph =
        jn.energized ? params.junction_capacity_vph : params.junction_degraded_capacity_vph;
    const double capacity = cap_vph * dt_s / 3600.0;

    struct Stream {
      std::size_t from_lane;
      std::size_t to_lane;
      double amount;
    };
    std::vector<Stream> streams;
    double demand = 0.0;
    for (std::size_t l : in[m]) {
      if (!utn.lanes[l].sections.empty()) demand += send[l].back();
    }
    if (demand <= 0.0) continue;
    const double admitted = std::min(1.0, capacity / demand);
    for (std::size_t l : in[m]) {
      if (utn.lanes[l].sections.empty()) continue;
      std::vector<std::size_t> exits;
      for (std::size_t o : out[m]) {
        if (utn.lanes[o].to != utn.lanes[l].from && !utn.lanes[o].sections.empty()) {
          exits.push_back(o);
        }
      }
      if (exits.empty()) {
        for (std::size_t o : out[m]) {
          if (!utn.lanes[o].sections.empty()) exits.push_back(o);
        }
      }
      if (exits.empty()) continue;
      const double share = send[l].back() * admitted / static_cast<double>(exits.size());
      for (std::size_t o : exits) streams.push_back({l, o, share});
    }
    // Receiving head cells cannot overfill; scale contributions down.
    for (std::size_t o : out[m]) {
      double incoming = 0.0;
      for (const auto& s : streams) {
        if (s.to_lane == o) incoming += s.amount;
      }
      if (incoming <= 0.0) continue;
      const double room = space[o].empty() ? 0.0 : space[o].front();
      if (incoming > room) {
        const double scale = room / incoming;
        for (auto& s : streams) {
          if (s.to_lane == o) s.amount *= scale;
        }
      }
    }
    for (const auto& s : streams) {
      delta[s.from_lane].back() -= s.amount;
      delta[s.to_lane].front() += s.amount;
    }
  }

  for (std::size_t l = 0; l < utn.lanes.size(); ++l) {
    auto& lane = utn.lanes[l];
    for (std::size_t i = 0; i < lane.sections.size(); ++i) {
      lane.sections[i].vehicles = std::max(0.0, lane.sections[i].vehicles + delta[l][i]);
    }
  }
  refresh_travel_times(utn, params);
}

double background_vehicle_count(const UtnState& utn) {
  double total = 0.0;
  for (const auto& lane : utn.lanes) {
    for (const auto& s : lane.sections) total += s.vehicles;
  }
  return total;
}

}  // namespace ptin::traffic
