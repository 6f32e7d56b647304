#pragma once

// UAV base stations: choosing the fewest deployment sites that make target
// switches controllable, and routing the fleet over those sites with battery,
// swap, workgroup and ready-time constraints.

#include <cstdint>
#include <string>
#include <vector>

#include "ptin/model.hpp"

namespace ptin::uav {

// ---------------------------------------------------------------------------
// Site selection

// A target is satisfied when, for at least one alternative, every listed bus
// communicates.
using Requirement = std::vector<std::vector<std::size_t>>;

Requirement close_requirement(const PdnLine& line);  // both end buses
Requirement open_requirement(const PdnLine& line);   // any controlling side
Requirement bus_requirement(std::size_t bus);        // the bus itself

struct UdssfInstance {
  std::vector<CnNode> nodes;        // current CN, comm-relevant flags set
  std::vector<Point> buses;         // all PDN bus positions
  std::vector<Requirement> targets;
  std::vector<Point> candidates;
  double uav_range_km = 1.0;
  std::size_t subset_cap = 3;
};

struct UdssfResult {
  bool solved = false;
  std::vector<std::size_t> chosen;  // candidate indices, ascending
  std::vector<Point> sites;
  std::size_t evaluated = 0;        // subsets checked
};

// Endpoints and midpoints of the target buses' connecting segments plus a
// grid over their bounding box at range/sqrt(2) spacing, plus eight points
// just inside the range around each target; duplicates removed, order
// deterministic.
std::vector<Point> candidate_sites(const std::vector<Point>& target_buses, double uav_range_km);

// Bus comm flags with UAV-backed nodes placed at `sites`.
std::vector<std::uint8_t> bus_comm_with_sites(const UdssfInstance& inst,
                                              const std::vector<Point>& sites);

bool targets_met(const UdssfInstance& inst, const std::vector<std::uint8_t>& bus_comm);

// Smallest candidate subset meeting every target, searched by increasing
// size with lexicographic order inside a size; subsets in which no site
// covers a needed bus or touches a disconnected powered CN node are skipped.
UdssfResult solve_udssf(const UdssfInstance& inst);

// ---------------------------------------------------------------------------
// Routing

enum class SiteKind { set_off, deployment, battery_swap };

struct RoutingSite {
  std::string id;
  SiteKind kind = SiteKind::deployment;
  Point pos;
  std::size_t group = kNone;     // deployment sites only
  double swap_duration_s = 0.0;  // battery-swap sites only
};

struct Workgroup {
  std::vector<std::size_t> sites;  // indices into RoutingInstance::sites
  double ready_s = 0.0;            // station ready time of the step
  double work_s = 0.0;             // DA work duration at every site
};

struct RoutingUav {
  std::string id;
  double speed_kmh = 180.0;
  double per_km_draw = 1.0 / 50.0;  // battery fraction per km
  double available_s = 0.0;         // earliest departure from the set-off site
};

struct RoutingInstance {
  std::vector<RoutingSite> sites;  // sites[0] is the set-off warehouse
  std::vector<Workgroup> groups;   // served strictly in this order
  std::vector<RoutingUav> uavs;
  double hover_equiv_kmh = 60.0;   // work draw = work_s at this speed-equivalent
  std::size_t node_budget = 200000;

  double distance_km(std::size_t a, std::size_t b) const;
  double work_draw(std::size_t uav, std::size_t group) const;
};

struct Visit {
  std::size_t site = kNone;
  double arrive_s = 0.0;
  double depart_s = 0.0;
  double battery_arrive = 1.0;
  double battery_depart = 1.0;
};

struct UavRoute {
  std::size_t uav = kNone;
  std::vector<Visit> visits;  // empty when unused; else starts and ends at site 0
};

struct RouteSolution {
  bool feasible = false;
  bool optimal = false;     // false when the node budget cut the search
  double objective_s = 0.0; // last return to the set-off site
  std::vector<UavRoute> routes;
  std::string failure;      // infeasibility reason naming the site
  std::size_t nodes = 0;
};

// Branch and bound over (site -> UAV, optional swap stop) decisions in group
// order. Bound: chained group ready/work times plus the longest return leg of
// the last group. Identical idle UAVs are interchangeable, so only the lowest
// index is branched on. Ties keep the first incumbent in UAV-then-site order.
RouteSolution solve_routing(const RoutingInstance& inst);

// Re-checks path selection, timing, battery, workgroup and ready-time
// constraints and the objective from the solution alone.
std::vector<std::string> validate_route(const RoutingInstance& inst, const RouteSolution& sol);

}  // namespace ptin::uav
