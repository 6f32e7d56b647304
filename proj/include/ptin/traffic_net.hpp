#pragma once

// Mesoscopic traffic: energization-dependent speed limits, section travel
// times, per-class speed rules and fastest paths over the junction graph.
// Background traffic is a cell-transmission model with one cell per lane
// section and a linear speed-density relation.

#include <cstddef>
#include <vector>

#include "ptin/model.hpp"

namespace ptin::traffic {

// Limit of a facility given its energization: prescribed when lit, otherwise
// degraded_factor * prescribed.
double facility_limit(bool energized, double prescribed_kmh, double degraded_factor);

// Recomputes v_lmax / v_jmax from the facility energization flags, then the
// section speeds, durations, lane travel times and junction crossing times.
// Returns true when any limit changed.
bool update_speed_limits(UtnState& utn, const Params& params);

// Section speeds from current densities (kernel), durations and totals.
void refresh_travel_times(UtnState& utn, const Params& params);

// Speed a vehicle of `kind` achieves given the average speed of the element.
// EVs follow the average; MESSs get the right-of-way boost capped at the
// prescribed limit of the element.
double class_speed(double average_kmh, double prescribed_kmh, VehicleKind kind, double omega);

double lane_travel_time(const TrafficLane& lane, VehicleKind kind, double omega_lane);
double junction_crossing_time(const TrafficJunction& junction, VehicleKind kind,
                              double omega_junction);

struct TravelClass {
  VehicleKind kind = VehicleKind::ev;
  double omega_lane = 0.0;
  double omega_junction = 0.0;

  static TravelClass of(const Vehicle& v) { return {v.kind, v.omega_lane, v.omega_junction}; }
};

// Cost of traversing a lane: its travel time plus the crossing of the junction
// it enters.
double edge_time(const UtnState& utn, std::size_t lane, const TravelClass& cls);

struct PathResult {
  bool reachable = false;
  std::vector<std::size_t> junctions;
  std::vector<std::size_t> lanes;
  double time_s = 0.0;
};

// Time-minimal path on the current snapshot. Among equal-time paths the one
// whose junction index sequence is lexicographically smallest wins.
PathResult fastest_path(const UtnState& utn, std::size_t origin, std::size_t destination,
                        const TravelClass& cls);

// Fastest time from every junction to `destination` (infinity if unreachable).
std::vector<double> times_to(const UtnState& utn, std::size_t destination, const TravelClass& cls);

// One step of background traffic. Vehicle count is conserved.
void advance_traffic(UtnState& utn, const Params& params, double dt_s);

double background_vehicle_count(const UtnState& utn);

}  // namespace ptin::traffic
