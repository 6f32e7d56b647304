#pragma once

// Shared test fixtures: the bundled case and a small hand-checkable feeder.

#include <json.hpp>

#include "ptin/coupling.hpp"
#include "ptin/model.hpp"
#include "ptin/scenario_io.hpp"

namespace fx {

using json = nlohmann::json;

inline const ptin::Scenario& bundled() {
  static const ptin::Scenario s = ptin::load_scenario(PTIN_CASE_FILE);
  return s;
}

inline ptin::Scenario build(const json& doc) { return ptin::parse_scenario(doc.dump()); }

inline json empty_doc() {
  return {{"schema_version", 1},
          {"name", "empty"},
          {"params", json::object()},
          {"pdn", {{"buses", json::array()}, {"lines", json::array()}}},
          {"utn", {{"junctions", json::array()}, {"lanes", json::array()}}},
          {"cn", {{"nodes", json::array()}}},
          {"couplings", {{"cn", json::object()}, {"junctions", json::object()},
                         {"lanes", json::object()}}},
          {"fleets", {{"vehicles", json::array()}, {"uavs", json::array()},
                      {"warehouses", json::array()}}},
          {"damage", {{"lines", json::array()}, {"buses", json::array()}}}};
}

// Station s0 feeds two laterals. The near lateral (s0-b1-b4) carries plain
// load; the far one (s0-b2-b3) carries every CN/UTN facility. A gateway node
// without supply sits next to the station and covers the whole feeder, so
// every switch is directly controllable.
//
//   b4 --- b1 --- s0 --- b2 --- b3
inline json toy_feeder() {
  json doc = empty_doc();
  doc["name"] = "toy";
  doc["params"] = {{"seed", 7}, {"horizon_s", 600.0}, {"participation", "exact"}, {"eta", 1.0}};
  doc["pdn"]["buses"] = json::array({
      {{"id", "s0"}, {"x_km", 0.0}, {"y_km", 0.0}, {"v2gs", true}, {"station_demand_kw", 0.0},
       {"access_junction", "j0"}},
      {{"id", "b1"}, {"x_km", -0.5}, {"y_km", 0.0}, {"load_kw", 200.0}},
      {{"id", "b4"}, {"x_km", -1.0}, {"y_km", 0.0}, {"load_kw", 80.0}},
      {{"id", "b2"}, {"x_km", 0.5}, {"y_km", 0.0}, {"load_kw", 40.0}},
      {{"id", "b3"}, {"x_km", 1.0}, {"y_km", 0.0}, {"load_kw", 60.0}},
  });
  doc["pdn"]["lines"] = json::array({
      {{"id", "s0-b1"}, {"from", "s0"}, {"to", "b1"}},
      {{"id", "b1-b4"}, {"from", "b1"}, {"to", "b4"}},
      {{"id", "s0-b2"}, {"from", "s0"}, {"to", "b2"}},
      {{"id", "b2-b3"}, {"from", "b2"}, {"to", "b3"}},
  });
  doc["utn"]["junctions"] = json::array({
      {{"id", "j0"}, {"x_km", 0.0}, {"y_km", -0.2}, {"demand_kw", 10.0}},
      {{"id", "j1"}, {"x_km", 1.0}, {"y_km", -0.2}, {"demand_kw", 10.0}},
  });
  doc["utn"]["lanes"] = json::array({
      {{"id", "j0-j1"}, {"from", "j0"}, {"to", "j1"}, {"demand_kw", 2.5}, {"sections", {1.0}}},
      {{"id", "j1-j0"}, {"from", "j1"}, {"to", "j0"}, {"demand_kw", 2.5}, {"sections", {1.0}}},
  });
  doc["cn"]["nodes"] = json::array({
      {{"id", "gw"}, {"x_km", 0.0}, {"y_km", 0.5}, {"range_km", 3.0}, {"central", true}},
      {{"id", "n3"}, {"x_km", 1.0}, {"y_km", 0.5}, {"range_km", 3.0}, {"demand_kw", 5.0}},
  });
  doc["couplings"]["cn"] = {{"n3", "b3"}};
  doc["couplings"]["junctions"] = {{"j0", "b2"}, {"j1", "b3"}};
  doc["couplings"]["lanes"] = {{"j0-j1", "b3"}, {"j1-j0", "b3"}};
  doc["fleets"]["vehicles"] = json::array({
      {{"id", "mess1"}, {"kind", "mess"}, {"x_km", 1.0}, {"y_km", -0.2}, {"junction", "j1"}},
  });
  doc["damage"]["buses"] = json::array();
  return doc;
}

}  // namespace fx
