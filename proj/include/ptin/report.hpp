#pragma once

// Run artifacts: event timeline, load-recovery curve, UAV traces, dispatch
// audit and summary. All writers are deterministic for identical inputs.

#include <filesystem>
#include <string>
#include <vector>

#include "ptin/restoration.hpp"

namespace ptin::report {

std::string events_json(const Scenario& s, const restore::RunResult& r);
std::string curve_csv(const restore::RunResult& r);
std::string uav_traces_json(const restore::RunResult& r);
std::string dispatch_json(const restore::RunResult& r);
std::string summary_json(const Scenario& s, const restore::RunResult& r);

// Writes <dir>/<strategy>_{events.json,curve.csv,uav_traces.json,dispatch.json,summary.json}.
// Returns the paths written.
std::vector<std::filesystem::path> write_run(const std::filesystem::path& dir, const Scenario& s,
                                             const restore::RunResult& r);

// One line per strategy: final kW, t50, t90, executed steps.
std::string comparison_table(const std::vector<restore::RunResult>& runs);

}  // namespace ptin::report
