#include <doctest.h>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace ptin;

TEST_CASE("bundled case loads with the expected network sizes") {
  const auto& s = fx::bundled();
  CHECK(s.pdn.buses.size() == 37);
  CHECK(s.utn.junctions.size() == 24);
  CHECK(s.utn.lanes.size() == 76);
  CHECK(s.cn.size() == 42);
  CHECK(s.stations().size() == 3);
  CHECK(validate_scenario(s).empty());
  for (const auto& b : s.pdn.buses) CHECK(b.cn_utn_load_kw <= b.load_kw + 1e-9);
}

TEST_CASE("empty networks with one central node form a valid scenario") {
  auto doc = fx::empty_doc();
  doc["cn"]["nodes"] = fx::json::array(
      {{{"id", "gw"}, {"x_km", 0.0}, {"y_km", 0.0}, {"central", true}}});
  const auto s = fx::build(doc);
  CHECK(s.pdn.buses.empty());
  REQUIRE(s.cn.size() == 1);
  CHECK(s.cn[0].comm);
}

TEST_CASE("a dangling coupling names the facility and the missing bus") {
  auto doc = fx::toy_feeder();
  doc["couplings"]["lanes"]["j0-j1"] = "99";
  try {
    fx::build(doc);
    FAIL("expected a ScenarioError");
  } catch (const ScenarioError& e) {
    REQUIRE_FALSE(e.issues().empty());
    const std::string& msg = e.issues().front();
    CHECK(msg.find("lane 'j0-j1'") != std::string::npos);
    CHECK(msg.find("'99'") != std::string::npos);
  }
}

TEST_CASE("a malformed number reports line and column") {
  const std::string text = "{\n  \"schema_version\": 1,\n  \"params\": {\"eta\": 0.3.1}\n}";
  try {
    parse_scenario(text);
    FAIL("expected a ScenarioError");
  } catch (const ScenarioError& e) {
    CHECK(e.issues().front().rfind("line 3, column", 0) == 0);
  }
}

TEST_CASE("a missing coupling is reported by name") {
  auto doc = fx::toy_feeder();
  doc["couplings"]["junctions"].erase("j1");
  try {
    fx::build(doc);
    FAIL("expected a ScenarioError");
  } catch (const ScenarioError& e) {
    bool named = false;
    for (const auto& i : e.issues()) named = named || i.find("junction j1") != std::string::npos;
    CHECK(named);
  }
}

TEST_CASE("serialize then parse reproduces the scenario") {
  const auto& s = fx::bundled();
  CHECK(parse_scenario(serialize_scenario(s)) == s);
  const auto toy = fx::build(fx::toy_feeder());
  CHECK(parse_scenario(serialize_scenario(toy)) == toy);
}

TEST_CASE("damage de-energizes everything downstream of the faults") {
  const auto& s = fx::bundled();
  const auto live = apply_damage(s, s.damage);
  const auto ref = oracle::energized_bfs(live.pdn);
  for (std::size_t i = 0; i < live.pdn.buses.size(); ++i) {
    CHECK(live.pdn.buses[i].energized == (ref[i] != 0));
  }
  for (const char* dead : {"704", "720", "730", "708", "734", "741"}) {
    CHECK_FALSE(live.pdn.buses[*live.find_bus(dead)].energized);
  }
  for (const char* lit : {"799", "701", "702", "703", "727"}) {
    CHECK(live.pdn.buses[*live.find_bus(lit)].energized);
  }
  for (const auto& n : live.cn) {
    if (n.supply_bus == kNone) continue;
    if (!live.pdn.buses[n.supply_bus].energized) CHECK_FALSE(n.comm);
  }
  for (const auto& j : live.utn.junctions) {
    if (!live.pdn.buses[j.supply_bus].energized) {
      CHECK(j.v_jmax_kmh == doctest::Approx(3.3));
    } else {
      CHECK(j.v_jmax_kmh == doctest::Approx(30.0));
    }
  }
}

TEST_CASE("an empty damage set leaves the scenario unchanged") {
  const auto& s = fx::bundled();
  CHECK(apply_damage(s, {}) == s);
}

TEST_CASE("applying the same damage twice is idempotent") {
  const auto& s = fx::bundled();
  const auto once = apply_damage(s, s.damage);
  CHECK(apply_damage(once, s.damage) == once);
}

TEST_CASE("damage naming an unknown element is rejected") {
  const auto& s = fx::bundled();
  CHECK_THROWS_AS(apply_damage(s, {{"no-such-line"}, {}}), ScenarioError);
}

TEST_CASE("damaged buses lose equipment and stations start offline") {
  auto doc = fx::toy_feeder();
  doc["damage"]["buses"] = fx::json::array({"b2"});
  const auto s = fx::build(doc);
  const auto live = apply_damage(s, s.damage);
  CHECK_FALSE(live.pdn.buses[*live.find_bus("b2")].equipment_ok);
  CHECK(live.pdn.buses[*live.find_bus("b1")].equipment_ok);
  const auto st = *live.find_bus("s0");
  CHECK_FALSE(live.pdn.buses[st].station_online);
  CHECK_FALSE(live.pdn.buses[st].energized);
}

namespace {

fx::json dispatch_doc(bool central_powered) {
  auto doc = fx::empty_doc();
  doc["pdn"]["buses"] = fx::json::array(
      {{{"id", "g"}, {"x_km", 0.0}, {"y_km", 0.0}, {"source", true}, {"load_kw", 10.0}}});
  doc["utn"]["junctions"] = fx::json::array(
      {{{"id", "j"}, {"x_km", 0.0}, {"y_km", 0.0}}});
  doc["couplings"]["junctions"] = {{"j", "g"}};
  doc["cn"]["nodes"] = fx::json::array(
      {{{"id", "gw"}, {"x_km", 0.0}, {"y_km", 0.0}, {"range_km", 3.0}, {"central", true}}});
  if (!central_powered) {
    doc["couplings"]["cn"] = {{"gw", "g"}};
    doc["damage"]["buses"] = fx::json::array({"g"});
  }
  doc["params"] = {{"participation", "exact"}, {"eta", 1.0}};
  auto& v = doc["fleets"]["vehicles"];
  for (int i = 0; i < 10; ++i) {
    v.push_back({{"id", "ev" + std::to_string(i)}, {"kind", "ev"}, {"x_km", 0.1 * i},
                 {"y_km", 0.0}, {"junction", "j"}});
  }
  v.push_back({{"id", "far"}, {"kind", "ev"}, {"x_km", 2.9}, {"y_km", 0.0}, {"junction", "j"}});
  v.push_back({{"id", "out"}, {"kind", "ev"}, {"x_km", 3.1}, {"y_km", 0.0}, {"junction", "j"}});
  for (int i = 0; i < 2; ++i) {
    v.push_back({{"id", "mess" + std::to_string(i)}, {"kind", "mess"}, {"x_km", 9.0},
                 {"y_km", 9.0}, {"junction", "j"}});
  }
  return doc;
}

}  // namespace

TEST_CASE("with every CN node down only MESSs are dispatchable") {
  const auto s = fx::build(dispatch_doc(false));
  const auto live = apply_damage(s, s.damage);
  const auto ids = dispatchable_evs(live);
  REQUIRE(ids.size() == 2);
  for (std::size_t z : ids) CHECK(live.fleets.vehicles[z].kind == VehicleKind::mess);
}

TEST_CASE("an EV 2.9 km from a 3 km node is dispatchable, one at 3.1 km is not") {
  const auto s = fx::build(dispatch_doc(true));
  const auto ids = dispatchable_evs(s);
  auto has = [&](const std::string& id) {
    for (std::size_t z : ids) {
      if (s.fleets.vehicles[z].id == id) return true;
    }
    return false;
  };
  CHECK(has("far"));
  CHECK_FALSE(has("out"));
  CHECK(ids.size() == 13);
}

TEST_CASE("restoring CN nodes never shrinks the dispatchable set") {
  const auto& s = fx::bundled();
  auto live = apply_damage(s, s.damage);
  auto brute = [](const Scenario& sc) {
    const auto comm = oracle::comm_reachability(sc.cn);
    std::size_t n = 0;
    for (const auto& v : sc.fleets.vehicles) {
      if (v.kind == VehicleKind::mess) {
        ++n;
        continue;
      }
      if (!v.participates) continue;
      for (std::size_t a = 0; a < sc.cn.size(); ++a) {
        if (comm[a] && within_range(sc.cn[a].pos, v.pos, sc.cn[a].range_km)) {
          ++n;
          break;
        }
      }
    }
    return n;
  };
  const std::size_t before = dispatchable_evs(live).size();
  CHECK(before == brute(live));
  // Re-power the buses of two dark CN nodes by bringing their stations online
  // and closing their lines.
  for (const char* st : {"704", "730"}) live.pdn.buses[*live.find_bus(st)].station_online = true;
  for (auto& l : live.pdn.lines) {
    if (l.equipment_ok && (l.id == "704-720" || l.id == "730-709")) l.switch_closed = true;
  }
  refresh_coupled_state(live);
  const std::size_t after = dispatchable_evs(live).size();
  CHECK(after == brute(live));
  CHECK(after >= before);
}

TEST_CASE("participation draws are reproducible") {
  const auto& s = fx::bundled();
  auto again = load_scenario(PTIN_CASE_FILE);
  CHECK(again.fleets.vehicles == s.fleets.vehicles);
  auto vehicles = s.fleets.vehicles;
  draw_participation(vehicles, 0.3, ParticipationMode::bernoulli, 99);
  auto other = s.fleets.vehicles;
  draw_participation(other, 0.3, ParticipationMode::bernoulli, 99);
  CHECK(vehicles == other);
  draw_participation(vehicles, 0.3, ParticipationMode::exact, 5);
  std::size_t evs = 0;
  std::size_t in = 0;
  for (const auto& v : vehicles) {
    if (v.kind != VehicleKind::ev) continue;
    ++evs;
    in += v.participates ? 1 : 0;
  }
  CHECK(in == static_cast<std::size_t>(0.3 * static_cast<double>(evs)));
}

TEST_CASE("the load seed option overrides the scenario seed") {
  LoadOptions opt;
  opt.seed = 12345;
  const auto a = load_scenario(PTIN_CASE_FILE, opt);
  const auto b = load_scenario(PTIN_CASE_FILE, opt);
  CHECK(a.fleets.vehicles == b.fleets.vehicles);
  CHECK(a.fleets.vehicles != fx::bundled().fleets.vehicles);
}
