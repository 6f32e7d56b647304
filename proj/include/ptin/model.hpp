#pragma once

// Shared domain types for the coupled power / traffic / communication model.
// Units throughout: km, km/h, seconds, kW, kWh. UAV battery is a fraction in
// [0, 1] whose full charge corresponds to `range_budget_km` of flight.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ptin {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

struct Point {
  double x_km = 0.0;
  double y_km = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

// Coordinates are held on a 1 m lattice so coverage comparisons are exact.
inline double snap_km(double v) { return std::round(v * 1000.0) / 1000.0; }
inline Point snap(Point p) { return {snap_km(p.x_km), snap_km(p.y_km)}; }

inline double distance_km(Point a, Point b) {
  return std::hypot(a.x_km - b.x_km, a.y_km - b.y_km);
}

// Squared distance in whole metres squared. Exact for snapped coordinates.
inline double distance_sq_m2(Point a, Point b) {
  const double dx = std::round((a.x_km - b.x_km) * 1000.0);
  const double dy = std::round((a.y_km - b.y_km) * 1000.0);
  return dx * dx + dy * dy;
}

// Covered iff distance <= range (ties count as covered).
inline bool within_range(Point a, Point b, double range_km) {
  const double r = std::round(range_km * 1000.0);
  return distance_sq_m2(a, b) <= r * r;
}

// ---------------------------------------------------------------------------
// Power distribution network

struct PdnBus {
  std::string id;
  Point pos;
  double load_kw = 0.0;
  double cn_utn_load_kw = 0.0;  // derived from couplings
  bool equipment_ok = true;
  bool energized = false;
  bool comm = false;
  bool load_switch_closed = false;
  bool is_v2gs = false;
  bool is_source = false;       // bulk-grid infeed, energized whenever healthy
  bool station_online = false;  // V2GS with at least one vehicle delivering power
  std::optional<double> station_demand_kw;
  std::optional<std::size_t> access_junction;  // UTN junction serving a V2GS

  friend bool operator==(const PdnBus&, const PdnBus&) = default;
};

struct PdnLine {
  std::string id;
  std::size_t from = kNone;
  std::size_t to = kNone;
  bool equipment_ok = true;
  bool initial_closed = false;
  bool switch_closed = false;
  bool control_from = true;  // the FTU at `from` actuates the switch
  bool control_to = false;   // the FTU at `to` does

  std::size_t other(std::size_t bus) const { return bus == from ? to : from; }
  friend bool operator==(const PdnLine&, const PdnLine&) = default;
};

struct PdnState {
  std::vector<PdnBus> buses;
  std::vector<PdnLine> lines;

  friend bool operator==(const PdnState&, const PdnState&) = default;
};

// ---------------------------------------------------------------------------
// Communication network

struct CnNode {
  std::string id;
  Point pos;
  double range_km = 3.0;
  bool is_central = false;
  std::size_t supply_bus = kNone;  // kNone only for UAV-backed nodes
  double demand_kw = 0.0;
  bool energized = false;
  bool comm = false;
  bool is_uav_backed = false;

  bool eligible() const { return energized || is_uav_backed; }
  friend bool operator==(const CnNode&, const CnNode&) = default;
};

// ---------------------------------------------------------------------------
// Urban traffic network

struct TrafficJunction {
  std::string id;
  Point pos;
  std::size_t supply_bus = kNone;
  double demand_kw = 0.0;
  bool energized = false;
  double prescribed_kmh = 30.0;
  double degraded_factor = 0.11;  // unpowered limit = factor * prescribed
  double v_jmax_kmh = 30.0;
  double crossing_length_km = 0.1;
  double crossing_time_s = 0.0;

  friend bool operator==(const TrafficJunction&, const TrafficJunction&) = default;
};

struct LaneSection {
  double length_km = 0.0;
  double speed_kmh = 0.0;   // current average driving speed
  double duration_s = 0.0;  // length / speed
  double vehicles = 0.0;    // background vehicles in the cell

  friend bool operator==(const LaneSection&, const LaneSection&) = default;
};

struct TrafficLane {
  std::string id;
  std::size_t from = kNone;
  std::size_t to = kNone;
  std::vector<LaneSection> sections;
  double length_km = 0.0;
  std::size_t supply_bus = kNone;
  double demand_kw = 0.0;
  bool energized = false;
  double prescribed_kmh = 60.0;
  double degraded_factor = 25.0 / 60.0;
  double v_lmax_kmh = 60.0;
  double travel_time_s = 0.0;

  friend bool operator==(const TrafficLane&, const TrafficLane&) = default;
};

struct UtnState {
  std::vector<TrafficJunction> junctions;
  std::vector<TrafficLane> lanes;

  friend bool operator==(const UtnState&, const UtnState&) = default;
};

// ---------------------------------------------------------------------------
// Fleets

enum class VehicleKind { ev, mess };

struct Vehicle {
  std::string id;
  VehicleKind kind = VehicleKind::ev;
  Point pos;
  std::size_t junction = kNone;  // UTN entry junction
  double output_kw = 50.0;
  double energy_kwh = 150.0;
  bool comm = false;
  bool participates = true;
  std::optional<std::size_t> assigned_station;
  double omega_lane = 0.0;      // right-of-way speed-up, MESS only
  double omega_junction = 0.0;

  friend bool operator==(const Vehicle&, const Vehicle&) = default;
};

struct Uav {
  std::string id;
  double speed_kmh = 180.0;
  double range_budget_km = 50.0;
  double cn_range_km = 1.0;

  double per_km_draw() const { return 1.0 / range_budget_km; }
  friend bool operator==(const Uav&, const Uav&) = default;
};

enum class WarehouseKind { set_off, battery_swap };

struct Warehouse {
  std::string id;
  WarehouseKind kind = WarehouseKind::set_off;
  Point pos;
  double swap_duration_s = 0.0;
  std::size_t junction = kNone;

  friend bool operator==(const Warehouse&, const Warehouse&) = default;
};

struct Fleets {
  std::vector<Vehicle> vehicles;
  std::vector<Uav> uavs;
  std::vector<Warehouse> warehouses;

  friend bool operator==(const Fleets&, const Fleets&) = default;
};

// ---------------------------------------------------------------------------

enum class ParticipationMode { bernoulli, exact };

struct Params {
  double lane_limit_kmh = 60.0;
  double lane_degraded_kmh = 25.0;
  double junction_limit_kmh = 30.0;
  double junction_degraded_kmh = 3.3;
  double eta = 0.30;
  ParticipationMode participation = ParticipationMode::bernoulli;
  std::uint64_t seed = 20240501;
  double omega_lane = 0.4;
  double omega_junction = 0.4;
  double speed_floor_kmh = 3.0;
  double jam_density_veh_per_km = 150.0;
  double junction_capacity_vph = 1800.0;
  double junction_degraded_capacity_vph = 600.0;
  double uav_work_duration_s = 300.0;
  double uav_hover_equiv_kmh = 60.0;
  double horizon_s = 4.0 * 3600.0;
  std::size_t routing_node_budget = 200000;
  std::size_t udssf_subset_cap = 3;
  double tolerance = 1e-9;

  friend bool operator==(const Params&, const Params&) = default;
};

struct DamageSet {
  std::vector<std::string> lines;
  std::vector<std::string> buses;

  bool empty() const { return lines.empty() && buses.empty(); }
  friend bool operator==(const DamageSet&, const DamageSet&) = default;
};

struct Scenario {
  int schema_version = kSchemaVersion;
  std::string name;
  PdnState pdn;
  std::vector<CnNode> cn;
  UtnState utn;
  Fleets fleets;
  Params params;
  DamageSet damage;

  std::optional<std::size_t> find_bus(const std::string& id) const;
  std::optional<std::size_t> find_line(const std::string& id) const;
  std::optional<std::size_t> find_junction(const std::string& id) const;
  std::optional<std::size_t> find_lane(const std::string& id) const;
  std::optional<std::size_t> find_vehicle(const std::string& id) const;
  std::optional<std::size_t> find_cn_node(const std::string& id) const;

  std::vector<std::size_t> stations() const;
  std::optional<std::size_t> set_off_warehouse() const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

// Thrown for malformed input (parse errors, dangling references, invariant
// violations). `issues` carries one human-readable line per problem.
class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

}  // namespace ptin
