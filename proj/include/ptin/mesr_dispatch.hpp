#pragma once

// Min-max-arrival assignment of mobile energy storage resources (EVs and
// MESSs) to V2G stations so that every station's power requirement is met.

#include <cstdint>
#include <string>
#include <vector>

#include "ptin/model.hpp"

namespace ptin::dispatch {

struct DispatchVehicle {
  std::string id;
  VehicleKind kind = VehicleKind::ev;
  double output_kw = 0.0;
};

struct DispatchStation {
  std::string id;
  double requirement_kw = 0.0;
};

struct DispatchInstance {
  std::vector<DispatchVehicle> vehicles;
  std::vector<DispatchStation> stations;  // in priority order
  std::vector<double> travel_s;           // [v * stations + s]; infinity = unreachable
  bool expected_capacity = false;         // count EVs at eta * output
  double eta = 1.0;

  double time(std::size_t v, std::size_t s) const { return travel_s[v * stations.size() + s]; }
  double capacity(std::size_t v) const;
};

struct DispatchSolution {
  bool feasible = false;                 // every requirement met
  std::vector<std::uint8_t> assign;      // w flags, [v * stations + s]
  double objective_s = 0.0;              // latest arrival among assigned vehicles
  std::vector<double> delivered_kw;      // per station
  std::vector<double> shortfall_kw;      // per station, 0 when covered
  std::size_t covered_prefix = 0;        // stations fully covered, in priority order
  std::size_t vehicles_used = 0;

  std::size_t station_of(std::size_t v, std::size_t stations) const;
};

// Exact: binary search over the distinct travel times; each threshold is
// decided by enumerating allocations of the larger-capacity vehicle classes
// and closing the smallest capacity class with a transportation (Hall)
// check. Among optimal thresholds the assignment uses the fewest vehicles.
// When total reachable capacity is insufficient, the longest coverable
// prefix of stations is served optimally and leftover vehicles are spread in
// proportion to the uncovered requirements.
DispatchSolution solve(const DispatchInstance& inst);

// Re-checks single assignment, requirement cover and the objective
// arithmetically. Empty when valid.
std::vector<std::string> validate(const DispatchInstance& inst, const DispatchSolution& sol);

}  // namespace ptin::dispatch
