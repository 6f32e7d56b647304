#pragma once

// Two-stage restoration: stage 1 restores CN/UTN facility loads first, stage 2
// picks up the remaining loads, each with MESR dispatch and UAV support. The
// engine executes plans on a 1 s traffic clock.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ptin/mesr_dispatch.hpp"
#include "ptin/model.hpp"
#include "ptin/uav_dispatch.hpp"

namespace ptin::restore {

enum class Strategy { a1, a2, a3 };
const char* strategy_name(Strategy s);
std::optional<Strategy> parse_strategy(const std::string& name);

enum class StepKind { close_line, close_load_switch, open_line };
const char* step_kind_name(StepKind k);

struct RecoveryStep {
  std::size_t index = 0;         // position in its stage plan
  int stage = 1;
  StepKind kind = StepKind::close_line;
  std::size_t line = kNone;      // close_line / open_line
  std::size_t bus = kNone;       // newly energized bus, or the load-switch bus
  std::size_t station = kNone;   // bus index of the serving V2GS
  std::vector<std::size_t> load_buses;  // load switches closed by this step
  double demand_kw = 0.0;        // incremental station demand
  double cn_utn_kw = 0.0;        // facility load restored by this step
  std::vector<Point> uav_sites;  // empty when DA works through the CN
  double ready_s = 0.0;          // predicted station ready time (plan clock)
};

// One round of the stage-1 selection loop, kept for replay checks.
struct Candidate {
  std::size_t line = kNone;
  std::size_t new_bus = kNone;
  std::size_t station = kNone;
  double cn_utn_kw = 0.0;
  double load_kw = 0.0;
  bool via_uav = false;
};

struct Round {
  std::vector<Candidate> admissible;
  std::size_t chosen = kNone;  // index into admissible
};

struct StagePlan {
  int stage = 1;
  std::vector<RecoveryStep> steps;
  std::vector<Round> rounds;
  std::vector<std::string> diagnostics;
  std::vector<std::size_t> unrecoverable;  // buses excluded for lack of DA
};

struct PlanOptions {
  std::size_t udssf_cap = 3;
};

// Hypothetical state used for planning: every healthy station is assumed
// online and the coupled state is refreshed.
Scenario planning_state(const Scenario& live);

// Stations feeding each bus in `s` through closed healthy lines (kNone when a
// bus is dead or fed by the bulk grid).
std::vector<std::size_t> station_of_buses(const Scenario& s);

// DA check with optional UAV help for a set of requirements on state `s`.
struct DaDecision {
  bool feasible = false;
  bool via_uav = false;
  std::vector<Point> sites;
};
DaDecision da_decision(const Scenario& s, const std::vector<uav::Requirement>& reqs,
                       const std::vector<std::size_t>& buses_involved, const PlanOptions& opt);

// Stage-1 planner: pre-steps separating stations and removing loops,
// then rounds that close the admissible line with the largest CN/UTN load,
// closing load switches only on facility buses.
StagePlan plan_stage1(const Scenario& live, const PlanOptions& opt = {});

// Stage-2 planner: every energized bus with an open load switch, direct DA first
// (by bus index), then UAV-assisted ones.
StagePlan plan_stage2(const Scenario& live, const PlanOptions& opt = {});

// Upstream-to-downstream pickup used by A1: breadth-first from each station,
// every step closes the line and the new bus's load switch.
StagePlan plan_upstream(const Scenario& live, int stage, const PlanOptions& opt = {});

// ---------------------------------------------------------------------------
// Execution

struct Event {
  double time_s = 0.0;
  std::string kind;
  std::string element;
  std::string detail;
};

struct UavTrace {
  int stage = 0;
  std::string uav;
  std::vector<uav::Visit> visits;  // absolute times
  std::vector<std::string> site_ids;  // parallel to visits
  std::vector<Point> site_pos;
};

struct DispatchAudit {
  int stage = 0;
  double time_s = 0.0;
  dispatch::DispatchInstance instance;
  dispatch::DispatchSolution solution;
  std::vector<std::string> violations;
};

struct StageSummary {
  int stage = 0;
  double start_s = 0.0;
  double end_s = -1.0;
  std::size_t planned = 0;
  std::size_t executed = 0;
  std::size_t unexecuted = 0;
  bool routing_optimal = true;
  double facility_fraction_at_end = 0.0;
};

struct RunOptions {
  double horizon_s = 0.0;  // 0 = use params.horizon_s
  std::size_t routing_node_budget = 0;  // 0 = use params
  std::size_t udssf_cap = 0;            // 0 = use params
  bool loss_of_voltage_trip = true;
  // Keep each UAV hovering at its last deployment site as a CN relay once its
  // work ends, instead of flying home. A relayed UAV is not routed again.
  bool uav_persist = false;
};

struct RunResult {
  Strategy strategy = Strategy::a3;
  std::vector<Event> events;
  std::vector<double> curve_kw;  // picked-up load sampled each second, index = second
  std::vector<UavTrace> uav_traces;
  std::vector<DispatchAudit> audits;
  std::vector<StagePlan> plans;
  std::vector<StageSummary> stages;
  std::vector<std::string> unexecuted;  // "step: reason"
  std::vector<std::string> invariant_failures;
  double outage_load_kw = 0.0;  // load not served by the bulk grid after damage
  double facility_load_kw = 0.0;
  double facility_fraction_before_stage2 = 0.0;
  // Stage-1 monotonicity trace: (time, dispatchable EV count, lane limits)
  std::vector<std::pair<double, std::size_t>> dispatchable_trace;
  std::vector<std::vector<double>> lane_limit_trace;
  std::vector<double> final_lane_density;  // veh/km per lane at the horizon

  double final_kw() const { return curve_kw.empty() ? 0.0 : curve_kw.back(); }
  // First second at which the curve reaches `fraction` of its final value.
  double time_to_fraction(double fraction) const;
  std::size_t executed_steps() const;
};

// Applies the scenario's damage set and executes the strategy.
RunResult run(const Scenario& scenario, Strategy strategy, const RunOptions& options = {});

}  // namespace ptin::restore
