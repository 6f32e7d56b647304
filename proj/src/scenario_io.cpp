#include "ptin/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ptin/coupling.hpp"
#include "ptin/traffic_net.hpp"

namespace ptin {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// Collects problems while walking the document; every accessor reports the
// JSON path of what it failed to read.
class Reader {
 public:
  std::vector<std::string> issues;

  void fail(const std::string& path, const std::string& what) {
    issues.push_back(path + ": " + what);
  }

  const json* member(const json& obj, const std::string& key, const std::string& path,
                     bool required) {
    if (!obj.is_object()) return nullptr;
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) fail(path + "." + key, "missing required field");
      return nullptr;
    }
    return &*it;
  }

  std::string str(const json& obj, const std::string& key, const std::string& path,
                  std::optional<std::string> fallback = std::nullopt) {
    const json* v = member(obj, key, path, !fallback.has_value());
    if (!v) return fallback.value_or("");
    if (!v->is_string()) {
      fail(path + "." + key, "expected a string");
      return fallback.value_or("");
    }
    return v->get<std::string>();
  }

  double num(const json& obj, const std::string& key, const std::string& path,
             std::optional<double> fallback = std::nullopt) {
    const json* v = member(obj, key, path, !fallback.has_value());
    if (!v) return fallback.value_or(0.0);
    if (!v->is_number()) {
      fail(path + "." + key, "expected a number");
      return fallback.value_or(0.0);
    }
    const double d = v->get<double>();
    if (!std::isfinite(d)) fail(path + "." + key, "number is not finite");
    return d;
  }

  bool flag(const json& obj, const std::string& key, const std::string& path, bool fallback) {
    const json* v = member(obj, key, path, false);
    if (!v) return fallback;
    if (!v->is_boolean()) {
      fail(path + "." + key, "expected true or false");
      return fallback;
    }
    return v->get<bool>();
  }

  const json& array(const json& obj, const std::string& key, const std::string& path) {
    static const json empty = json::array();
    const json* v = member(obj, key, path, false);
    if (!v) return empty;
    if (!v->is_array()) {
      fail(path + "." + key, "expected an array");
      return empty;
    }
    return *v;
  }

  const json& object(const json& obj, const std::string& key, const std::string& path) {
    static const json empty = json::object();
    const json* v = member(obj, key, path, false);
    if (!v) return empty;
    if (!v->is_object()) {
      fail(path + "." + key, "expected an object");
      return empty;
    }
    return *v;
  }
};

std::string at(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

template <typename T>
std::map<std::string, std::size_t> index_ids(const std::vector<T>& items, const std::string& kind,
                                             Reader& r) {
  std::map<std::string, std::size_t> ids;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!ids.emplace(items[i].id, i).second) {
      r.issues.push_back("duplicate " + kind + " id '" + items[i].id + "'");
    }
  }
  return ids;
}

std::size_t nearest_junction(const UtnState& utn, Point p) {
  std::size_t best = kNone;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < utn.junctions.size(); ++m) {
    const double d = distance_sq_m2(utn.junctions[m].pos, p);
    if (d < best_d) {
      best_d = d;
      best = m;
    }
  }
  return best;
}

void read_params(const json& doc, Reader& r, Params& p) {
  const json& obj = r.object(doc, "params", "$");
  const std::map<std::string, double*> reals = {
      {"lane_limit_kmh", &p.lane_limit_kmh},
      {"lane_degraded_kmh", &p.lane_degraded_kmh},
      {"junction_limit_kmh", &p.junction_limit_kmh},
      {"junction_degraded_kmh", &p.junction_degraded_kmh},
      {"eta", &p.eta},
      {"omega_lane", &p.omega_lane},
      {"omega_junction", &p.omega_junction},
      {"speed_floor_kmh", &p.speed_floor_kmh},
      {"jam_density_veh_per_km", &p.jam_density_veh_per_km},
      {"junction_capacity_vph", &p.junction_capacity_vph},
      {"junction_degraded_capacity_vph", &p.junction_degraded_capacity_vph},
      {"uav_work_duration_s", &p.uav_work_duration_s},
      {"uav_hover_equiv_kmh", &p.uav_hover_equiv_kmh},
      {"horizon_s", &p.horizon_s},
      {"tolerance", &p.tolerance},
  };
  const std::map<std::string, std::size_t*> counts = {
      {"routing_node_budget", &p.routing_node_budget},
      {"udssf_subset_cap", &p.udssf_subset_cap},
  };
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const std::string path = "$.params." + it.key();
    if (auto d = reals.find(it.key()); d != reals.end()) {
      if (!it->is_number()) {
        r.fail(path, "expected a number");
        continue;
      }
      *d->second = it->get<double>();
    } else if (auto c = counts.find(it.key()); c != counts.end()) {
      if (!it->is_number_unsigned()) {
        r.fail(path, "expected a nonnegative integer");
        continue;
      }
      *c->second = it->get<std::size_t>();
    } else if (it.key() == "seed") {
      if (!it->is_number_unsigned()) {
        r.fail(path, "expected a nonnegative integer");
        continue;
      }
      p.seed = it->get<std::uint64_t>();
    } else if (it.key() == "participation") {
      const std::string mode = it->is_string() ? it->get<std::string>() : "";
      if (mode == "bernoulli") {
        p.participation = ParticipationMode::bernoulli;
      } else if (mode == "exact") {
        p.participation = ParticipationMode::exact;
      } else {
        r.fail(path, "expected \"bernoulli\" or \"exact\"");
      }
    } else {
      r.fail(path, "unknown parameter");
    }
  }
}

Point read_point(const json& obj, const std::string& path, Reader& r) {
  return snap({r.num(obj, "x_km", path), r.num(obj, "y_km", path)});
}

Scenario build(const json& doc, const LoadOptions& options) {
  Reader r;
  Scenario s;
  if (!doc.is_object()) throw ScenarioError({"$: scenario must be a JSON object"});

  const json* version = r.member(doc, "schema_version", "$", true);
  if (version) {
    if (!version->is_number_integer()) {
      r.fail("$.schema_version", "expected an integer");
    } else {
      s.schema_version = version->get<int>();
      if (s.schema_version != kSchemaVersion) {
        r.fail("$.schema_version", "unsupported version " + std::to_string(s.schema_version) +
                                       " (expected " + std::to_string(kSchemaVersion) + ")");
      }
    }
  }
  s.name = r.str(doc, "name", "$", std::string{});
  read_params(doc, r, s.params);
  const Params& p = s.params;

  // --- PDN -----------------------------------------------------------------
  const json& pdn = r.object(doc, "pdn", "$");
  const json& buses = r.array(pdn, "buses", "$.pdn");
  for (std::size_t i = 0; i < buses.size(); ++i) {
    const std::string path = at("$.pdn.buses", i);
    const json& b = buses[i];
    PdnBus bus;
    bus.id = r.str(b, "id", path);
    bus.pos = read_point(b, path, r);
    bus.load_kw = r.num(b, "load_kw", path, 0.0);
    bus.is_v2gs = r.flag(b, "v2gs", path, false);
    bus.is_source = r.flag(b, "source", path, false);
    bus.load_switch_closed = r.flag(b, "load_switch_closed", path, true);
    if (bus.is_v2gs) bus.station_demand_kw = r.num(b, "station_demand_kw", path, 0.0);
    s.pdn.buses.push_back(std::move(bus));
  }
  const auto bus_ids = index_ids(s.pdn.buses, "bus", r);
  auto bus_ref = [&](const std::string& id, const std::string& who) -> std::size_t {
    auto it = bus_ids.find(id);
    if (it == bus_ids.end()) {
      r.issues.push_back(who + " references missing bus '" + id + "'");
      return kNone;
    }
    return it->second;
  };

  const json& lines = r.array(pdn, "lines", "$.pdn");
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const std::string path = at("$.pdn.lines", k);
    const json& l = lines[k];
    PdnLine line;
    line.id = r.str(l, "id", path);
    line.from = bus_ref(r.str(l, "from", path), "line '" + line.id + "'");
    line.to = bus_ref(r.str(l, "to", path), "line '" + line.id + "'");
    line.initial_closed = r.flag(l, "closed", path, true);
    line.switch_closed = line.initial_closed;
    const std::string control = r.str(l, "control", path, std::string("from"));
    if (control == "from") {
      line.control_from = true;
      line.control_to = false;
    } else if (control == "to") {
      line.control_from = false;
      line.control_to = true;
    } else if (control == "both") {
      line.control_from = true;
      line.control_to = true;
    } else {
      r.fail(path + ".control", "expected \"from\", \"to\" or \"both\"");
    }
    s.pdn.lines.push_back(std::move(line));
  }
  index_ids(s.pdn.lines, "line", r);

  // --- UTN -----------------------------------------------------------------
  const json& utn = r.object(doc, "utn", "$");
  const json& junctions = r.array(utn, "junctions", "$.utn");
  std::vector<bool> crossing_given;
  for (std::size_t m = 0; m < junctions.size(); ++m) {
    const std::string path = at("$.utn.junctions", m);
    const json& j = junctions[m];
    TrafficJunction jn;
    jn.id = r.str(j, "id", path);
    jn.pos = read_point(j, path, r);
    jn.demand_kw = r.num(j, "demand_kw", path, 0.0);
    crossing_given.push_back(r.member(j, "crossing_length_km", path, false) != nullptr);
    jn.crossing_length_km = r.num(j, "crossing_length_km", path, 0.0);
    jn.prescribed_kmh = p.junction_limit_kmh;
    jn.degraded_factor = p.junction_degraded_kmh / p.junction_limit_kmh;
    s.utn.junctions.push_back(std::move(jn));
  }
  const auto junction_ids = index_ids(s.utn.junctions, "junction", r);
  auto junction_ref = [&](const std::string& id, const std::string& who) -> std::size_t {
    auto it = junction_ids.find(id);
    if (it == junction_ids.end()) {
      r.issues.push_back(who + " references missing junction '" + id + "'");
      return kNone;
    }
    return it->second;
  };

  const json& lanes = r.array(utn, "lanes", "$.utn");
  for (std::size_t l = 0; l < lanes.size(); ++l) {
    const std::string path = at("$.utn.lanes", l);
    const json& j = lanes[l];
    TrafficLane lane;
    lane.id = r.str(j, "id", path);
    lane.from = junction_ref(r.str(j, "from", path), "lane '" + lane.id + "'");
    lane.to = junction_ref(r.str(j, "to", path), "lane '" + lane.id + "'");
    lane.demand_kw = r.num(j, "demand_kw", path, 0.0);
    lane.prescribed_kmh = p.lane_limit_kmh;
    lane.degraded_factor = p.lane_degraded_kmh / p.lane_limit_kmh;
    const json& sections = r.array(j, "sections", path);
    for (std::size_t i = 0; i < sections.size(); ++i) {
      if (!sections[i].is_number()) {
        r.fail(at(path + ".sections", i), "expected a section length in km");
        continue;
      }
      LaneSection sec;
      sec.length_km = sections[i].get<double>();
      lane.sections.push_back(sec);
      lane.length_km += sec.length_km;
    }
    if (const json* per = r.member(j, "section_vehicles", path, false)) {
      if (!per->is_array() || per->size() != lane.sections.size()) {
        r.fail(path + ".section_vehicles", "expected one count per section");
      } else {
        for (std::size_t i = 0; i < per->size(); ++i) {
          if (!(*per)[i].is_number()) {
            r.fail(at(path + ".section_vehicles", i), "expected a number");
            continue;
          }
          lane.sections[i].vehicles = (*per)[i].get<double>();
        }
      }
    } else {
      const double total = r.num(j, "background_vehicles", path, 0.0);
      for (auto& sec : lane.sections) {
        sec.vehicles = lane.length_km > 0.0 ? total * sec.length_km / lane.length_km : 0.0;
      }
    }
    s.utn.lanes.push_back(std::move(lane));
  }
  const auto lane_ids = index_ids(s.utn.lanes, "lane", r);

  for (std::size_t m = 0; m < s.utn.junctions.size(); ++m) {
    if (crossing_given[m]) continue;
    double total = 0.0;
    int count = 0;
    for (const auto& lane : s.utn.lanes) {
      if (lane.from == m || lane.to == m) {
        total += lane.length_km;
        ++count;
      }
    }
    s.utn.junctions[m].crossing_length_km = count > 0 ? total / count / 5.0 : 0.0;
  }

  // Access junctions of stations.
  for (std::size_t i = 0; i < buses.size() && i < s.pdn.buses.size(); ++i) {
    auto& bus = s.pdn.buses[i];
    if (!bus.is_v2gs) continue;
    const std::string path = at("$.pdn.buses", i);
    if (r.member(buses[i], "access_junction", path, false)) {
      bus.access_junction =
          junction_ref(r.str(buses[i], "access_junction", path), "station '" + bus.id + "'");
    } else if (!s.utn.junctions.empty()) {
      bus.access_junction = nearest_junction(s.utn, bus.pos);
    }
  }

  // --- CN ------------------------------------------------------------------
  const json& cn = r.object(doc, "cn", "$");
  const json& nodes = r.array(cn, "nodes", "$.cn");
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    const std::string path = at("$.cn.nodes", a);
    const json& j = nodes[a];
    CnNode node;
    node.id = r.str(j, "id", path);
    node.pos = read_point(j, path, r);
    node.range_km = r.num(j, "range_km", path, 3.0);
    node.is_central = r.flag(j, "central", path, false);
    node.demand_kw = r.num(j, "demand_kw", path, 0.0);
    s.cn.push_back(std::move(node));
  }
  const auto node_ids = index_ids(s.cn, "CN node", r);

  // --- Couplings -----------------------------------------------------------
  const json& couplings = r.object(doc, "couplings", "$");
  auto couple = [&](const char* section, const char* kind, auto& items,
                    const std::map<std::string, std::size_t>& ids) {
    const json& map = r.object(couplings, section, "$.couplings");
    for (auto it = map.begin(); it != map.end(); ++it) {
      const std::string path = std::string("$.couplings.") + section + "." + it.key();
      auto f = ids.find(it.key());
      if (f == ids.end()) {
        r.issues.push_back(path + ": coupling names unknown " + kind + " '" + it.key() + "'");
        continue;
      }
      if (!it->is_string()) {
        r.fail(path, "expected a bus id");
        continue;
      }
      items[f->second].supply_bus =
          bus_ref(it->get<std::string>(), std::string(kind) + " '" + it.key() + "'");
    }
  };
  couple("cn", "CN node", s.cn, node_ids);
  couple("junctions", "junction", s.utn.junctions, junction_ids);
  couple("lanes", "lane", s.utn.lanes, lane_ids);

  // --- Fleets --------------------------------------------------------------
  const json& fleets = r.object(doc, "fleets", "$");
  const json& vehicles = r.array(fleets, "vehicles", "$.fleets");
  bool all_flags_given = true;
  for (std::size_t z = 0; z < vehicles.size(); ++z) {
    const std::string path = at("$.fleets.vehicles", z);
    const json& j = vehicles[z];
    Vehicle v;
    v.id = r.str(j, "id", path);
    const std::string kind = r.str(j, "kind", path, std::string("ev"));
    if (kind == "ev") {
      v.kind = VehicleKind::ev;
    } else if (kind == "mess") {
      v.kind = VehicleKind::mess;
      v.omega_lane = p.omega_lane;
      v.omega_junction = p.omega_junction;
    } else {
      r.fail(path + ".kind", "expected \"ev\" or \"mess\"");
    }
    v.pos = read_point(j, path, r);
    v.output_kw = r.num(j, "output_kw", path, v.kind == VehicleKind::mess ? 500.0 : 50.0);
    v.energy_kwh = r.num(j, "energy_kwh", path, v.kind == VehicleKind::mess ? 776.0 : 150.0);
    if (r.member(j, "junction", path, false)) {
      v.junction = junction_ref(r.str(j, "junction", path), "vehicle '" + v.id + "'");
    } else {
      v.junction = nearest_junction(s.utn, v.pos);
    }
    if (r.member(j, "participates", path, false)) {
      v.participates = r.flag(j, "participates", path, true);
    } else if (v.kind == VehicleKind::ev) {
      all_flags_given = false;
    }
    s.fleets.vehicles.push_back(std::move(v));
  }
  index_ids(s.fleets.vehicles, "vehicle", r);
  if (options.seed) s.params.seed = *options.seed;
  if (!all_flags_given || options.seed) {
    draw_participation(s.fleets.vehicles, s.params.eta, s.params.participation, s.params.seed);
  }

  const json& uavs = r.array(fleets, "uavs", "$.fleets");
  for (std::size_t u = 0; u < uavs.size(); ++u) {
    const std::string path = at("$.fleets.uavs", u);
    Uav uav;
    uav.id = r.str(uavs[u], "id", path);
    uav.speed_kmh = r.num(uavs[u], "speed_kmh", path, 180.0);
    uav.range_budget_km = r.num(uavs[u], "range_budget_km", path, 50.0);
    uav.cn_range_km = r.num(uavs[u], "cn_range_km", path, 1.0);
    s.fleets.uavs.push_back(std::move(uav));
  }
  index_ids(s.fleets.uavs, "UAV", r);

  const json& houses = r.array(fleets, "warehouses", "$.fleets");
  for (std::size_t h = 0; h < houses.size(); ++h) {
    const std::string path = at("$.fleets.warehouses", h);
    Warehouse w;
    w.id = r.str(houses[h], "id", path);
    const std::string kind = r.str(houses[h], "kind", path, std::string("set_off"));
    if (kind == "set_off") {
      w.kind = WarehouseKind::set_off;
    } else if (kind == "battery_swap") {
      w.kind = WarehouseKind::battery_swap;
    } else {
      r.fail(path + ".kind", "expected \"set_off\" or \"battery_swap\"");
    }
    w.pos = read_point(houses[h], path, r);
    w.swap_duration_s = r.num(houses[h], "swap_duration_s", path, 0.0);
    if (r.member(houses[h], "junction", path, false)) {
      w.junction = junction_ref(r.str(houses[h], "junction", path), "warehouse '" + w.id + "'");
    } else {
      w.junction = nearest_junction(s.utn, w.pos);
    }
    s.fleets.warehouses.push_back(std::move(w));
  }
  index_ids(s.fleets.warehouses, "warehouse", r);

  // --- Damage --------------------------------------------------------------
  const json& damage = r.object(doc, "damage", "$");
  for (const char* key : {"lines", "buses"}) {
    const json& list = r.array(damage, key, "$.damage");
    auto& target = std::string(key) == "lines" ? s.damage.lines : s.damage.buses;
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (!list[i].is_string()) {
        r.fail(at(std::string("$.damage.") + key, i), "expected an id");
        continue;
      }
      target.push_back(list[i].get<std::string>());
    }
  }

  if (!r.issues.empty()) throw ScenarioError(std::move(r.issues));

  const auto facility = facility_load_per_bus(s);
  for (std::size_t i = 0; i < s.pdn.buses.size(); ++i) {
    s.pdn.buses[i].cn_utn_load_kw = facility[i];
  }

  auto issues = validate_scenario(s);
  if (!issues.empty()) throw ScenarioError(std::move(issues));

  refresh_coupled_state(s);
  return s;
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  const std::size_t end = std::min(text.size(), byte > 0 ? byte - 1 : 0);
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

template <typename T>
void require_unique(const std::vector<T>& items, const std::string& kind,
                    std::vector<std::string>& issues) {
  std::set<std::string> seen;
  for (const auto& item : items) {
    if (item.id.empty()) issues.push_back(kind + " with empty id");
    if (!seen.insert(item.id).second) issues.push_back("duplicate " + kind + " id '" + item.id + "'");
  }
}

}  // namespace

Scenario parse_scenario(std::string_view text, const LoadOptions& options) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_column(text, e.byte);
    std::string what = e.what();
    // Keep only the library's description of the token; the location is ours.
    if (auto pos = what.find(": ", what.find("parse error")); pos != std::string::npos) {
      what = what.substr(pos + 2);
    }
    throw ScenarioError({"line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + what});
  }
  return build(doc, options);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError({"cannot open '" + path.string() + "'"});
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Scenario load_scenario(const std::filesystem::path& path, const LoadOptions& options) {
  return parse_scenario(read_text_file(path), options);
}

std::vector<std::string> validate_scenario(const Scenario& s) {
  std::vector<std::string> issues;
  const Params& p = s.params;
  const double tol = 1e-6;
  auto bad = [&](std::string what) { issues.push_back(std::move(what)); };

  if (s.schema_version != kSchemaVersion) bad("unsupported schema version");
  if (p.eta < 0.0 || p.eta > 1.0) bad("params.eta must lie in [0, 1]");
  if (!(p.horizon_s > 0.0)) bad("params.horizon_s must be positive");
  if (!(p.lane_limit_kmh > 0.0) || !(p.lane_degraded_kmh > 0.0) ||
      p.lane_degraded_kmh > p.lane_limit_kmh) {
    bad("lane limits must satisfy 0 < degraded <= prescribed");
  }
  if (!(p.junction_limit_kmh > 0.0) || !(p.junction_degraded_kmh > 0.0) ||
      p.junction_degraded_kmh > p.junction_limit_kmh) {
    bad("junction limits must satisfy 0 < degraded <= prescribed");
  }
  if (!(p.speed_floor_kmh > 0.0) || !(p.jam_density_veh_per_km > 0.0)) {
    bad("speed floor and jam density must be positive");
  }
  if (p.omega_lane < 0.0 || p.omega_junction < 0.0) bad("right-of-way factors must be >= 0");

  require_unique(s.pdn.buses, "bus", issues);
  require_unique(s.pdn.lines, "line", issues);
  require_unique(s.cn, "CN node", issues);
  require_unique(s.utn.junctions, "junction", issues);
  require_unique(s.utn.lanes, "lane", issues);
  require_unique(s.fleets.vehicles, "vehicle", issues);
  require_unique(s.fleets.uavs, "UAV", issues);
  require_unique(s.fleets.warehouses, "warehouse", issues);

  const std::size_t nb = s.pdn.buses.size();
  const std::size_t nj = s.utn.junctions.size();
  for (const auto& bus : s.pdn.buses) {
    if (bus.load_kw < 0.0) bad("bus " + bus.id + " has negative load");
    if (bus.cn_utn_load_kw > bus.load_kw + tol) {
      bad("bus " + bus.id + " feeds more CN/UTN load than its total load");
    }
    if (bus.is_v2gs != bus.station_demand_kw.has_value()) {
      bad("bus " + bus.id + " station demand present iff it is a V2GS");
    }
    if (bus.is_v2gs && nj > 0 && (!bus.access_junction || *bus.access_junction >= nj)) {
      bad("station " + bus.id + " has no access junction");
    }
  }
  for (const auto& line : s.pdn.lines) {
    if (line.from >= nb || line.to >= nb) {
      bad("line " + line.id + " references a missing bus");
      continue;
    }
    if (line.from == line.to) bad("line " + line.id + " is a self loop");
    if (!line.control_from && !line.control_to) bad("line " + line.id + " has no controlling FTU");
    if (line.switch_closed && !line.equipment_ok) bad("faulted line " + line.id + " is closed");
  }
  for (const auto& node : s.cn) {
    if (!(node.range_km > 0.0)) bad("CN node " + node.id + " needs a positive range");
    if (node.demand_kw < 0.0) bad("CN node " + node.id + " has negative demand");
    if (node.supply_bus == kNone && !node.is_central && !node.is_uav_backed) {
      bad("CN node " + node.id + " has no supply bus coupling");
    } else if (node.supply_bus != kNone && node.supply_bus >= nb) {
      bad("CN node " + node.id + " references a missing bus");
    }
  }
  for (const auto& j : s.utn.junctions) {
    if (j.supply_bus == kNone) bad("junction " + j.id + " has no supply bus coupling");
    else if (j.supply_bus >= nb) bad("junction " + j.id + " references a missing bus");
    if (j.demand_kw < 0.0) bad("junction " + j.id + " has negative demand");
    if (j.crossing_length_km < 0.0) bad("junction " + j.id + " has negative crossing length");
  }
  for (const auto& lane : s.utn.lanes) {
    if (lane.supply_bus == kNone) bad("lane " + lane.id + " has no supply bus coupling");
    else if (lane.supply_bus >= nb) bad("lane " + lane.id + " references a missing bus");
    if (lane.from >= nj || lane.to >= nj) {
      bad("lane " + lane.id + " references a missing junction");
    } else if (lane.from == lane.to) {
      bad("lane " + lane.id + " starts and ends at the same junction");
    }
    if (lane.sections.empty()) bad("lane " + lane.id + " has no sections");
    double total = 0.0;
    for (const auto& sec : lane.sections) {
      if (sec.length_km < 0.0) bad("lane " + lane.id + " has a negative section length");
      if (sec.vehicles < 0.0) bad("lane " + lane.id + " has a negative vehicle count");
      total += sec.length_km;
    }
    if (std::abs(total - lane.length_km) > tol) bad("lane " + lane.id + " length != section sum");
  }
  for (const auto& v : s.fleets.vehicles) {
    if (!(v.output_kw > 0.0)) bad("vehicle " + v.id + " needs positive output");
    if (v.energy_kwh < 0.0) bad("vehicle " + v.id + " has negative energy");
    if (nj > 0 && v.junction >= nj) bad("vehicle " + v.id + " has no entry junction");
  }
  for (const auto& u : s.fleets.uavs) {
    if (!(u.speed_kmh > 0.0) || !(u.range_budget_km > 0.0) || !(u.cn_range_km > 0.0)) {
      bad("UAV " + u.id + " needs positive speed, range budget and CN range");
    }
  }
  std::size_t set_off = 0;
  for (const auto& w : s.fleets.warehouses) {
    if (w.kind == WarehouseKind::set_off) ++set_off;
    if (w.kind == WarehouseKind::set_off && w.swap_duration_s != 0.0) {
      bad("warehouse " + w.id + ": swap duration only applies to battery-swap sites");
    }
    if (w.swap_duration_s < 0.0) bad("warehouse " + w.id + " has a negative swap duration");
  }
  if (!s.fleets.uavs.empty() && set_off != 1) {
    bad("UAV fleets need exactly one set-off warehouse");
  }
  for (const auto& id : s.damage.lines) {
    if (!s.find_line(id)) bad("damage names unknown line '" + id + "'");
  }
  for (const auto& id : s.damage.buses) {
    if (!s.find_bus(id)) bad("damage names unknown bus '" + id + "'");
  }
  return issues;
}

std::string serialize_scenario(const Scenario& s) {
  ordered_json doc;
  doc["schema_version"] = s.schema_version;
  doc["name"] = s.name;
  const Params& p = s.params;
  ordered_json params;
  params["lane_limit_kmh"] = p.lane_limit_kmh;
  params["lane_degraded_kmh"] = p.lane_degraded_kmh;
  params["junction_limit_kmh"] = p.junction_limit_kmh;
  params["junction_degraded_kmh"] = p.junction_degraded_kmh;
  params["eta"] = p.eta;
  params["participation"] = p.participation == ParticipationMode::exact ? "exact" : "bernoulli";
  params["seed"] = p.seed;
  params["omega_lane"] = p.omega_lane;
  params["omega_junction"] = p.omega_junction;
  params["speed_floor_kmh"] = p.speed_floor_kmh;
  params["jam_density_veh_per_km"] = p.jam_density_veh_per_km;
  params["junction_capacity_vph"] = p.junction_capacity_vph;
  params["junction_degraded_capacity_vph"] = p.junction_degraded_capacity_vph;
  params["uav_work_duration_s"] = p.uav_work_duration_s;
  params["uav_hover_equiv_kmh"] = p.uav_hover_equiv_kmh;
  params["horizon_s"] = p.horizon_s;
  params["routing_node_budget"] = p.routing_node_budget;
  params["udssf_subset_cap"] = p.udssf_subset_cap;
  params["tolerance"] = p.tolerance;
  doc["params"] = params;

  const auto& buses = s.pdn.buses;
  auto bus_id = [&](std::size_t i) { return buses[i].id; };
  ordered_json jb = ordered_json::array();
  for (const auto& b : buses) {
    ordered_json o;
    o["id"] = b.id;
    o["x_km"] = b.pos.x_km;
    o["y_km"] = b.pos.y_km;
    o["load_kw"] = b.load_kw;
    o["source"] = b.is_source;
    o["v2gs"] = b.is_v2gs;
    o["load_switch_closed"] = b.load_switch_closed;
    if (b.station_demand_kw) o["station_demand_kw"] = *b.station_demand_kw;
    if (b.access_junction) o["access_junction"] = s.utn.junctions[*b.access_junction].id;
    jb.push_back(o);
  }
  ordered_json jl = ordered_json::array();
  for (const auto& l : s.pdn.lines) {
    ordered_json o;
    o["id"] = l.id;
    o["from"] = bus_id(l.from);
    o["to"] = bus_id(l.to);
    o["closed"] = l.initial_closed;
    o["control"] = l.control_from && l.control_to ? "both" : (l.control_from ? "from" : "to");
    jl.push_back(o);
  }
  doc["pdn"] = {{"buses", jb}, {"lines", jl}};

  ordered_json jn = ordered_json::array();
  ordered_json cn_coupling = ordered_json::object();
  for (const auto& n : s.cn) {
    if (n.is_uav_backed) continue;
    ordered_json o;
    o["id"] = n.id;
    o["x_km"] = n.pos.x_km;
    o["y_km"] = n.pos.y_km;
    o["range_km"] = n.range_km;
    o["central"] = n.is_central;
    o["demand_kw"] = n.demand_kw;
    jn.push_back(o);
    if (n.supply_bus != kNone) cn_coupling[n.id] = bus_id(n.supply_bus);
  }
  doc["cn"] = {{"nodes", jn}};

  ordered_json jj = ordered_json::array();
  ordered_json junction_coupling = ordered_json::object();
  for (const auto& j : s.utn.junctions) {
    ordered_json o;
    o["id"] = j.id;
    o["x_km"] = j.pos.x_km;
    o["y_km"] = j.pos.y_km;
    o["demand_kw"] = j.demand_kw;
    o["crossing_length_km"] = j.crossing_length_km;
    jj.push_back(o);
    if (j.supply_bus != kNone) junction_coupling[j.id] = bus_id(j.supply_bus);
  }
  ordered_json jlanes = ordered_json::array();
  ordered_json lane_coupling = ordered_json::object();
  for (const auto& l : s.utn.lanes) {
    ordered_json o;
    o["id"] = l.id;
    o["from"] = s.utn.junctions[l.from].id;
    o["to"] = s.utn.junctions[l.to].id;
    o["demand_kw"] = l.demand_kw;
    ordered_json lengths = ordered_json::array();
    ordered_json counts = ordered_json::array();
    for (const auto& sec : l.sections) {
      lengths.push_back(sec.length_km);
      counts.push_back(sec.vehicles);
    }
    o["sections"] = lengths;
    o["section_vehicles"] = counts;
    jlanes.push_back(o);
    if (l.supply_bus != kNone) lane_coupling[l.id] = bus_id(l.supply_bus);
  }
  doc["utn"] = {{"junctions", jj}, {"lanes", jlanes}};

  ordered_json jv = ordered_json::array();
  for (const auto& v : s.fleets.vehicles) {
    ordered_json o;
    o["id"] = v.id;
    o["kind"] = v.kind == VehicleKind::mess ? "mess" : "ev";
    o["x_km"] = v.pos.x_km;
    o["y_km"] = v.pos.y_km;
    if (v.junction != kNone) o["junction"] = s.utn.junctions[v.junction].id;
    o["output_kw"] = v.output_kw;
    o["energy_kwh"] = v.energy_kwh;
    o["participates"] = v.participates;
    jv.push_back(o);
  }
  ordered_json ju = ordered_json::array();
  for (const auto& u : s.fleets.uavs) {
    ju.push_back({{"id", u.id},
                  {"speed_kmh", u.speed_kmh},
                  {"range_budget_km", u.range_budget_km},
                  {"cn_range_km", u.cn_range_km}});
  }
  ordered_json jw = ordered_json::array();
  for (const auto& w : s.fleets.warehouses) {
    ordered_json o;
    o["id"] = w.id;
    o["kind"] = w.kind == WarehouseKind::battery_swap ? "battery_swap" : "set_off";
    o["x_km"] = w.pos.x_km;
    o["y_km"] = w.pos.y_km;
    o["swap_duration_s"] = w.swap_duration_s;
    if (w.junction != kNone) o["junction"] = s.utn.junctions[w.junction].id;
    jw.push_back(o);
  }
  doc["fleets"] = {{"vehicles", jv}, {"uavs", ju}, {"warehouses", jw}};
  doc["couplings"] = {{"cn", cn_coupling}, {"junctions", junction_coupling}, {"lanes", lane_coupling}};
  doc["damage"] = {{"lines", s.damage.lines}, {"buses", s.damage.buses}};
  return doc.dump(1) + "\n";
}

}  // namespace ptin
