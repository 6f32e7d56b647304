#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "ptin/power_net.hpp"

using namespace ptin;
using namespace ptin::power;

namespace {

PdnState chain(std::size_t n, bool source_at_zero = true) {
  PdnState pdn;
  for (std::size_t i = 0; i < n; ++i) {
    PdnBus b;
    b.id = "b" + std::to_string(i);
    b.load_kw = 10.0;
    b.load_switch_closed = true;
    b.is_source = source_at_zero && i == 0;
    pdn.buses.push_back(b);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    PdnLine l;
    l.id = "l" + std::to_string(i);
    l.from = i;
    l.to = i + 1;
    l.initial_closed = l.switch_closed = true;
    pdn.lines.push_back(l);
  }
  return pdn;
}

void add_line(PdnState& pdn, std::size_t a, std::size_t b, bool closed) {
  PdnLine l;
  l.id = "x" + std::to_string(pdn.lines.size());
  l.from = a;
  l.to = b;
  l.initial_closed = l.switch_closed = closed;
  pdn.lines.push_back(l);
}

}  // namespace

TEST_CASE("a single fed chain is radial") {
  auto pdn = chain(5);
  apply_energization(pdn);
  for (const auto& b : pdn.buses) CHECK(b.energized);
  CHECK(check_radiality(pdn).radial);
}

TEST_CASE("closing a tie on an energized chain forms a loop") {
  auto pdn = chain(5);
  add_line(pdn, 0, 4, false);
  apply_energization(pdn);
  CHECK_FALSE(close_keeps_radial(pdn, 4));
  pdn.lines[4].switch_closed = true;
  const auto rep = check_radiality(pdn);
  CHECK_FALSE(rep.radial);
  CHECK(rep.witness == Witness::cycle);
  CHECK(rep.lines.size() == 5);
}

TEST_CASE("two sources in one component are rejected") {
  auto pdn = chain(4);
  pdn.buses[3].is_source = true;
  apply_energization(pdn);
  const auto rep = check_radiality(pdn);
  CHECK_FALSE(rep.radial);
  CHECK(rep.witness == Witness::multi_source);

  auto split = chain(4);
  split.buses[3].is_v2gs = true;
  split.lines[1].switch_closed = false;
  CHECK_FALSE(close_keeps_radial(split, 1));
}

TEST_CASE("de-energized islands do not count against radiality") {
  auto pdn = chain(4);
  pdn.lines[0].switch_closed = false;
  add_line(pdn, 1, 3, true);
  apply_energization(pdn);
  CHECK(pdn.buses[0].energized);
  CHECK_FALSE(pdn.buses[1].energized);
  CHECK(check_radiality(pdn).radial);
}

TEST_CASE("a fault opens the path and de-energizes downstream buses") {
  auto pdn = chain(5);
  pdn.lines[2].equipment_ok = false;
  apply_energization(pdn);
  CHECK(pdn.buses[2].energized);
  CHECK_FALSE(pdn.buses[3].energized);
  CHECK_FALSE(pdn.buses[4].energized);
  CHECK_FALSE(pdn.buses[3].load_switch_closed);
  CHECK(pdn.buses[2].load_switch_closed);
}

TEST_CASE("an online station feeds its island") {
  auto pdn = chain(5);
  pdn.lines[1].switch_closed = false;
  pdn.buses[3].is_v2gs = true;
  apply_energization(pdn);
  CHECK_FALSE(pdn.buses[3].energized);
  pdn.buses[3].station_online = true;
  apply_energization(pdn);
  for (std::size_t i : {2u, 3u, 4u}) CHECK(pdn.buses[i].energized);
  CHECK(check_radiality(pdn).radial);
  CHECK_FALSE(apply_energization(pdn));
}

TEST_CASE("switch control needs communication at the right ends") {
  PdnLine l;
  l.id = "t";
  l.from = 0;
  l.to = 1;
  const std::uint8_t none[] = {0, 0};
  const std::uint8_t from_only[] = {1, 0};
  const std::uint8_t to_only[] = {0, 1};
  const std::uint8_t both[] = {1, 1};
  CHECK_FALSE(control_feasible(l, SwitchAction::close, from_only).feasible);
  CHECK_FALSE(control_feasible(l, SwitchAction::close, to_only).feasible);
  CHECK(control_feasible(l, SwitchAction::close, both).feasible);
  CHECK_FALSE(control_feasible(l, SwitchAction::open, both).feasible);

  l.switch_closed = true;
  l.control_from = true;
  l.control_to = false;
  CHECK(control_feasible(l, SwitchAction::open, from_only).feasible);
  CHECK_FALSE(control_feasible(l, SwitchAction::open, to_only).feasible);
  l.control_to = true;
  CHECK(control_feasible(l, SwitchAction::open, to_only).feasible);
  CHECK_FALSE(control_feasible(l, SwitchAction::open, none).feasible);

  l.switch_closed = false;
  l.equipment_ok = false;
  const auto faulted = control_feasible(l, SwitchAction::close, both);
  CHECK_FALSE(faulted.feasible);
  CHECK(faulted.reason.find("faulted") != std::string::npos);
}

TEST_CASE("station capacity accounting") {
  StationBalance b{0, 1000.0, 0.0};
  auto r = station_step_commit(b, 300.0);
  REQUIRE(r.accepted);
  CHECK(r.balance.residual_kw() == doctest::Approx(700.0));

  StationBalance small{0, 500.0, 0.0};
  r = station_step_commit(small, 600.0);
  CHECK_FALSE(r.accepted);
  CHECK(r.balance.picked_up_kw == 0.0);

  StationBalance evs{0, 150.0, 0.0};
  for (int k = 0; k < 3; ++k) {
    r = station_step_commit(evs, 50.0);
    REQUIRE(r.accepted);
    evs = r.balance;
  }
  CHECK(evs.residual_kw() == doctest::Approx(0.0));
  CHECK_FALSE(station_step_commit(evs, 1.0).accepted);
}

TEST_CASE("energization matches a plain BFS on random switch states") {
  const auto base = apply_damage(fx::bundled(), fx::bundled().damage).pdn;
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    auto pdn = base;
    for (auto& l : pdn.lines) l.switch_closed = l.equipment_ok && (rng() % 4 != 0);
    for (auto& b : pdn.buses) {
      if (b.is_v2gs) b.station_online = rng() % 2 == 0;
    }
    const auto sweep = energization_sweep(pdn, active_sources(pdn));
    CHECK(sweep == oracle::energized_bfs(pdn));
    apply_energization(pdn);
    CHECK(check_radiality(pdn).radial == oracle::radial_union_find(pdn));
  }
}

TEST_CASE("closing an admissible line never de-energizes a bus") {
  auto pdn = apply_damage(fx::bundled(), fx::bundled().damage).pdn;
  for (auto& b : pdn.buses) {
    if (b.is_v2gs) b.station_online = true;
  }
  apply_energization(pdn);
  REQUIRE(check_radiality(pdn).radial);
  std::mt19937_64 rng(5);
  for (int step = 0; step < 40; ++step) {
    std::vector<std::size_t> admissible;
    for (std::size_t k = 0; k < pdn.lines.size(); ++k) {
      if (close_keeps_radial(pdn, k)) admissible.push_back(k);
    }
    if (admissible.empty()) break;
    const auto before = pdn.buses;
    pdn.lines[admissible[rng() % admissible.size()]].switch_closed = true;
    apply_energization(pdn);
    CHECK(check_radiality(pdn).radial);
    for (std::size_t i = 0; i < pdn.buses.size(); ++i) {
      if (before[i].energized) CHECK(pdn.buses[i].energized);
    }
  }
}
