#include <doctest.h>

#include <regex>
#include <set>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "ptin/restoration.hpp"

using namespace ptin;
using namespace ptin::restore;

namespace {

const Scenario& toy() {
  static const Scenario s = fx::build(fx::toy_feeder());
  return s;
}

const RunResult& bundled_run(Strategy st) {
  static const RunResult a1 = run(fx::bundled(), Strategy::a1);
  static const RunResult a2 = run(fx::bundled(), Strategy::a2);
  static const RunResult a3 = run(fx::bundled(), Strategy::a3);
  return st == Strategy::a1 ? a1 : st == Strategy::a2 ? a2 : a3;
}

std::string bus_id(const Scenario& s, const RecoveryStep& step) {
  return step.bus == kNone ? "" : s.pdn.buses[step.bus].id;
}

}  // namespace

TEST_CASE("strategy names round trip") {
  for (auto st : {Strategy::a1, Strategy::a2, Strategy::a3}) {
    CHECK(parse_strategy(strategy_name(st)) == st);
  }
  CHECK_FALSE(parse_strategy("A4").has_value());
}

TEST_CASE("stage 1 reaches facility buses before plain load") {
  const auto live = apply_damage(toy(), toy().damage);
  const auto plan = plan_stage1(live);
  REQUIRE(plan.steps.size() == 2);
  CHECK(bus_id(live, plan.steps[0]) == "b2");
  CHECK(bus_id(live, plan.steps[1]) == "b3");
  for (const auto& step : plan.steps) {
    CHECK(step.uav_sites.empty());
    for (std::size_t b : step.load_buses) CHECK(live.pdn.buses[b].cn_utn_load_kw > 0.0);
  }
  CHECK(oracle::replay_stage1(live, plan, 3).empty());
}

TEST_CASE("upstream pickup starts with the lowest-index neighbour") {
  const auto live = apply_damage(toy(), toy().damage);
  const auto plan = plan_upstream(live, 1);
  REQUIRE_FALSE(plan.steps.empty());
  CHECK(bus_id(live, plan.steps[0]) == "b1");
  for (const auto& step : plan.steps) CHECK_FALSE(step.load_buses.empty());
}

TEST_CASE("the toy feeder restores everything with one MESS") {
  for (auto st : {Strategy::a1, Strategy::a2, Strategy::a3}) {
    const auto r = run(toy(), st);
    CHECK(r.invariant_failures.empty());
    CHECK(r.uav_traces.empty());
    CHECK(r.final_kw() == doctest::Approx(380.0));
    CHECK(r.unexecuted.empty());
  }
}

TEST_CASE("stage 2 picks up what stage 1 left") {
  const auto r = run(toy(), Strategy::a3);
  REQUIRE(r.stages.size() == 2);
  CHECK(r.stages[0].executed > 0);
  CHECK(r.stages[1].executed > 0);
  CHECK(r.facility_fraction_before_stage2 == doctest::Approx(1.0));
  CHECK(r.stages[1].start_s >= r.stages[0].end_s);
}

TEST_CASE("the stage-1 planner replays on the bundled case") {
  const auto& s = fx::bundled();
  const auto live = apply_damage(s, s.damage);
  const auto plan = plan_stage1(live, {s.params.udssf_subset_cap});
  CHECK_FALSE(plan.steps.empty());
  CHECK(oracle::replay_stage1(live, plan, s.params.udssf_subset_cap).empty());
}

TEST_CASE("a one-second horizon executes nothing") {
  RunOptions opt;
  opt.horizon_s = 1.0;
  const auto r = run(fx::bundled(), Strategy::a3, opt);
  CHECK(r.executed_steps() == 0);
  CHECK(r.curve_kw.size() == 1);
  CHECK_FALSE(r.unexecuted.empty());
}

TEST_CASE("runs are deterministic") {
  const auto again = run(fx::bundled(), Strategy::a3);
  const auto& first = bundled_run(Strategy::a3);
  CHECK(again.curve_kw == first.curve_kw);
  CHECK(again.events.size() == first.events.size());
  CHECK(again.final_lane_density == first.final_lane_density);
}

TEST_CASE("bundled runs hold their invariants") {
  for (auto st : {Strategy::a1, Strategy::a2, Strategy::a3}) {
    const auto& r = bundled_run(st);
    CAPTURE(strategy_name(st));
    CHECK(r.invariant_failures.empty());
    CHECK(r.final_kw() > 0.0);
    for (std::size_t t = 1; t < r.curve_kw.size(); ++t) CHECK(r.curve_kw[t] >= r.curve_kw[t - 1]);
    for (const auto& a : r.audits) CHECK(a.violations.empty());
    for (std::size_t k = 1; k < r.dispatchable_trace.size(); ++k) {
      CHECK(r.dispatchable_trace[k].second >= r.dispatchable_trace[k - 1].second);
    }
    for (std::size_t k = 1; k < r.lane_limit_trace.size(); ++k) {
      for (std::size_t l = 0; l < r.lane_limit_trace[k].size(); ++l) {
        CHECK(r.lane_limit_trace[k][l] >= r.lane_limit_trace[k - 1][l]);
      }
    }
  }
}

TEST_CASE("strategies rank as expected on the bundled case") {
  const auto& a1 = bundled_run(Strategy::a1);
  const auto& a2 = bundled_run(Strategy::a2);
  const auto& a3 = bundled_run(Strategy::a3);
  CHECK(a3.final_kw() >= a2.final_kw() - 1e-6);
  CHECK(a2.final_kw() >= a1.final_kw() - 1e-6);
  CHECK(a3.time_to_fraction(0.9) <= a2.time_to_fraction(0.9));
  CHECK(a3.facility_fraction_before_stage2 == doctest::Approx(1.0));
}

TEST_CASE("no UAV-assisted step fires before its UAV work ends") {
  const std::regex group_re(R"(stage (\d+) step (\d+) .*)");
  const std::regex ends_re(R"(work ends ([0-9.]+) s)");
  const std::regex step_re(R"(stage (\d+) #(\d+) .*)");
  for (auto st : {Strategy::a1, Strategy::a2, Strategy::a3}) {
    const auto& r = bundled_run(st);
    std::map<std::string, double> work_end;
    std::map<std::string, double> fired;
    for (const auto& e : r.events) {
      std::smatch m;
      std::smatch w;
      if (e.kind == "uav_group" && std::regex_match(e.element, m, group_re) &&
          std::regex_search(e.detail, w, ends_re)) {
        work_end[m[1].str() + "/" + m[2].str()] = std::stod(w[1].str());
      }
      if (e.kind == "step" && std::regex_match(e.detail, m, step_re)) {
        fired[m[1].str() + "/" + m[2].str()] = e.time_s;
      }
    }
    if (st != Strategy::a2) CHECK_FALSE(work_end.empty());
    for (const auto& [key, end] : work_end) {
      CAPTURE(key);
      if (fired.count(key)) CHECK(fired[key] + 1e-9 >= end);
    }
  }
}

TEST_CASE("stations serve only buses in their own island") {
  const auto& s = fx::bundled();
  auto live = apply_damage(s, s.damage);
  const auto owners = station_of_buses(planning_state(live));
  for (std::size_t b = 0; b < owners.size(); ++b) {
    if (owners[b] == kNone) continue;
    CHECK(live.pdn.buses[owners[b]].is_v2gs);
  }
  for (std::size_t st : s.stations()) CHECK(owners[st] == st);
}

TEST_CASE("persisting UAVs stay on station as relays") {
  RunOptions opt;
  opt.uav_persist = true;
  const auto r = run(fx::bundled(), Strategy::a3, opt);
  CHECK(r.invariant_failures.empty());
  REQUIRE_FALSE(r.uav_traces.empty());
  std::size_t relays = 0;
  for (const auto& e : r.events) relays += e.kind == "uav_relay";
  std::set<std::string> flown;
  for (const auto& t : r.uav_traces) {
    CHECK(flown.insert(t.uav).second);  // a relaying UAV is never routed again
    CHECK(t.site_ids.back().rfind("step", 0) == 0);
  }
  CHECK(relays > 0);
  CHECK(relays <= flown.size());
  CHECK(r.final_kw() >= bundled_run(Strategy::a3).final_kw() - 1e-6);
}
