#pragma once

// Brute-force reference implementations used to check the solvers. They share
// only the data types with the library; every decision is recomputed here from
// first principles (union-find, plain BFS, exhaustive enumeration).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ptin/mesr_dispatch.hpp"
#include "ptin/model.hpp"
#include "ptin/restoration.hpp"
#include "ptin/traffic_net.hpp"
#include "ptin/uav_dispatch.hpp"

namespace ptin::oracle {

// Buses reachable from healthy sources and online stations over closed
// healthy lines.
std::vector<std::uint8_t> energized_bfs(const PdnState& pdn);

// Union-find: no closed healthy line joins two already-connected energized
// buses, and no energized component holds more than one source.
bool radial_union_find(const PdnState& pdn);

// Comm flags of CN nodes: BFS from eligible central nodes over links between
// eligible nodes.
std::vector<std::uint8_t> comm_reachability(const std::vector<CnNode>& nodes);

// Buses within range of at least one comm-normal node.
std::vector<std::uint8_t> covered_buses(const std::vector<CnNode>& nodes,
                                        const std::vector<std::uint8_t>& node_comm,
                                        const std::vector<Point>& buses);

// Minimum latest arrival over all (S+1)^V assignments meeting every
// requirement; nullopt when none does.
std::optional<double> dispatch_exhaustive(const dispatch::DispatchInstance& inst);

// Minimum completion time over every site-to-UAV assignment and swap-stop
// placement, each timed greedily; nullopt when none is battery-feasible.
std::optional<double> routing_exhaustive(const uav::RoutingInstance& inst);

// Smallest number of candidates that meets every target (checked over all
// subsets); nullopt when even all candidates fail.
std::optional<std::size_t> udssf_exhaustive(const uav::UdssfInstance& inst);

// Requirement check with UAV nodes at `sites`, from scratch.
bool udssf_sites_work(const uav::UdssfInstance& inst, const std::vector<Point>& sites);

// Fastest time over all simple junction paths (small graphs only).
double path_exhaustive(const UtnState& utn, std::size_t origin, std::size_t destination,
                       const traffic::TravelClass& cls);

// Replays stage-1 rounds: recomputes every round's admissible line set and
// checks the chosen line maximizes CN/UTN load with the documented
// tie-break. Returns one line per disagreement.
std::vector<std::string> replay_stage1(const Scenario& live, const restore::StagePlan& plan,
                                       std::size_t udssf_cap);

// ---------------------------------------------------------------------------
// Seeded equivalence suites

struct SuiteReport {
  std::string name;
  std::size_t total = 0;
  std::size_t matched = 0;
  double seconds = 0.0;
  std::string counterexample;  // first mismatch, empty when all match

  bool passed() const { return total > 0 && matched == total; }
};

SuiteReport dispatch_suite(std::size_t count, std::uint64_t seed);
SuiteReport routing_suite(std::size_t count, std::uint64_t seed);
SuiteReport connectivity_suite(const Scenario& s, std::size_t count, std::uint64_t seed);
SuiteReport radiality_suite(const Scenario& s, std::size_t count, std::uint64_t seed);
SuiteReport udssf_suite(std::size_t count, std::uint64_t seed);

}  // namespace ptin::oracle
