#include <doctest.h>

#include <limits>
#include <random>

#include "oracles.hpp"
#include "ptin/mesr_dispatch.hpp"

using namespace ptin;
using namespace ptin::dispatch;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

DispatchInstance two_stations() {
  DispatchInstance inst;
  inst.stations = {{"A", 500.0}, {"B", 100.0}};
  inst.vehicles = {{"mess", VehicleKind::mess, 500.0},
                   {"ev1", VehicleKind::ev, 50.0},
                   {"ev2", VehicleKind::ev, 50.0},
                   {"ev3", VehicleKind::ev, 50.0}};
  inst.travel_s = {100.0, 900.0,   // mess
                   200.0, 300.0,   // ev1
                   250.0, 50.0,    // ev2
                   300.0, 60.0};   // ev3
  return inst;
}

DispatchInstance random_instance(std::mt19937_64& rng) {
  DispatchInstance inst;
  const std::size_t ns = 1 + rng() % 3;
  const std::size_t nv = 1 + rng() % 6;
  for (std::size_t s = 0; s < ns; ++s) {
    inst.stations.push_back({"s" + std::to_string(s), 50.0 * static_cast<double>(1 + rng() % 8)});
  }
  for (std::size_t v = 0; v < nv; ++v) {
    const bool mess = rng() % 3 == 0;
    inst.vehicles.push_back({"v" + std::to_string(v), mess ? VehicleKind::mess : VehicleKind::ev,
                             mess ? 500.0 : 50.0 * static_cast<double>(1 + rng() % 3)});
  }
  for (std::size_t k = 0; k < ns * nv; ++k) {
    inst.travel_s.push_back(rng() % 7 == 0 ? kInf : static_cast<double>(10 + rng() % 600));
  }
  return inst;
}

// Valid solutions report nothing; partial ones report only their shortfall.
bool consistent(const DispatchInstance& inst, const DispatchSolution& sol) {
  for (const auto& issue : validate(inst, sol)) {
    if (sol.feasible || issue.rfind("requirement cover violated", 0) != 0) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("the MESS takes the big station and close EVs the small one") {
  const auto inst = two_stations();
  const auto sol = solve(inst);
  REQUIRE(sol.feasible);
  CHECK(sol.objective_s == 100.0);
  CHECK(sol.station_of(0, 2) == 0);
  CHECK(sol.station_of(2, 2) == 1);
  CHECK(sol.station_of(3, 2) == 1);
  CHECK(sol.vehicles_used == 3);
  CHECK(validate(inst, sol).empty());
  CHECK(sol.objective_s == *oracle::dispatch_exhaustive(inst));
}

TEST_CASE("expected capacity discounts EVs by participation") {
  auto inst = two_stations();
  inst.expected_capacity = true;
  inst.eta = 0.5;
  CHECK(inst.capacity(0) == 500.0);
  CHECK(inst.capacity(1) == 25.0);
  const auto sol = solve(inst);
  CHECK_FALSE(sol.feasible);
  CHECK(sol.covered_prefix == 1);
  CHECK(sol.shortfall_kw[1] == doctest::Approx(25.0));
  CHECK(consistent(inst, sol));
}

TEST_CASE("insufficient capacity serves the priority prefix") {
  DispatchInstance inst;
  inst.stations = {{"A", 100.0}, {"B", 100.0}};
  inst.vehicles = {{"ev1", VehicleKind::ev, 50.0}, {"ev2", VehicleKind::ev, 50.0},
                   {"ev3", VehicleKind::ev, 50.0}};
  inst.travel_s = {10.0, 10.0, 20.0, 20.0, 30.0, 30.0};
  const auto sol = solve(inst);
  CHECK_FALSE(sol.feasible);
  CHECK(sol.covered_prefix == 1);
  CHECK(sol.delivered_kw[0] == doctest::Approx(100.0));
  CHECK(sol.delivered_kw[1] == doctest::Approx(50.0));
  CHECK(sol.shortfall_kw[1] == doctest::Approx(50.0));
}

TEST_CASE("unreachable vehicles are never assigned") {
  DispatchInstance inst;
  inst.stations = {{"A", 50.0}};
  inst.vehicles = {{"ev1", VehicleKind::ev, 50.0}, {"ev2", VehicleKind::ev, 50.0}};
  inst.travel_s = {kInf, 400.0};
  const auto sol = solve(inst);
  REQUIRE(sol.feasible);
  CHECK(sol.assign[0] == 0);
  CHECK(sol.objective_s == 400.0);
}

TEST_CASE("the validator flags broken assignments") {
  const auto inst = two_stations();
  auto sol = solve(inst);
  auto twice = sol;
  twice.assign[0 * 2 + 1] = 1;
  CHECK_FALSE(validate(inst, twice).empty());
  auto short_b = sol;
  short_b.assign[2 * 2 + 1] = 0;
  short_b.assign[3 * 2 + 1] = 0;
  CHECK_FALSE(validate(inst, short_b).empty());
  auto wrong_obj = sol;
  wrong_obj.objective_s = 50.0;
  CHECK_FALSE(validate(inst, wrong_obj).empty());
}

TEST_CASE("random instances match exhaustive assignment") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 300; ++trial) {
    const auto inst = random_instance(rng);
    const auto sol = solve(inst);
    const auto ref = oracle::dispatch_exhaustive(inst);
    CHECK(sol.feasible == ref.has_value());
    if (ref) CHECK(sol.objective_s == *ref);
    CHECK(consistent(inst, sol));
  }
}

TEST_CASE("adding a vehicle never delays the fleet") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    auto inst = random_instance(rng);
    const auto before = solve(inst);
    if (!before.feasible) continue;
    DispatchInstance more = inst;
    more.vehicles.push_back({"extra", VehicleKind::ev, 50.0});
    for (std::size_t s = 0; s < inst.stations.size(); ++s) {
      more.travel_s.push_back(static_cast<double>(10 + rng() % 600));
    }
    const auto after = solve(more);
    REQUIRE(after.feasible);
    CHECK(after.objective_s <= before.objective_s);
  }
}

TEST_CASE("scaling every travel time scales the objective") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    auto inst = random_instance(rng);
    const auto base = solve(inst);
    if (!base.feasible) continue;
    for (auto& t : inst.travel_s) t *= 4.0;
    const auto scaled = solve(inst);
    REQUIRE(scaled.feasible);
    CHECK(scaled.objective_s == base.objective_s * 4.0);
  }
}
