#pragma once

// PDN topology state: radiality, energization propagation, DA-gated switch
// control and V2GS capacity accounting.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ptin/model.hpp"

namespace ptin::power {

enum class Witness { none, cycle, multi_source, unfed };

struct RadialityReport {
  bool radial = true;
  Witness witness = Witness::none;
  std::vector<std::size_t> lines;  // the loop for Witness::cycle
  std::vector<std::size_t> buses;  // the offending component otherwise
};

// Radial iff every energized component of the closed, healthy line subgraph
// is a tree fed by exactly one source. Checked with the single-commodity-flow
// count identity (closed lines == energized buses - roots) per component.
RadialityReport check_radiality(const PdnState& pdn);

// Healthy bulk-grid sources plus online V2GS buses.
std::vector<std::size_t> active_sources(const PdnState& pdn);

// e_i = 1 iff bus i is reachable from a source through closed healthy lines.
std::vector<std::uint8_t> energization_sweep(const PdnState& pdn,
                                             std::span<const std::size_t> sources);

// Writes the sweep result back and opens load switches on dead buses.
// Returns true when any flag changed.
bool apply_energization(PdnState& pdn);

enum class SwitchAction { open, close };

struct ControlCheck {
  bool feasible = false;
  std::string reason;
};

// DA feasibility of operating `line`: closing an open line needs both end
// buses in communication; opening a closed line needs a controlling FTU side
// (either, when both sides control) in communication.
ControlCheck control_feasible(const PdnLine& line, SwitchAction action,
                              std::span<const std::uint8_t> bus_comm);

// Closing `line` keeps the network radial and does not tie two sources.
bool close_keeps_radial(const PdnState& pdn, std::size_t line);

struct StationBalance {
  std::size_t station = kNone;
  double fleet_capacity_kw = 0.0;
  double picked_up_kw = 0.0;

  double residual_kw() const { return fleet_capacity_kw - picked_up_kw; }
};

struct CommitResult {
  bool accepted = false;
  StationBalance balance;
};

CommitResult station_step_commit(const StationBalance& balance, double step_load_kw,
                                 double tolerance = 1e-9);

}  // namespace ptin::power
