#include "ptin/model.hpp"

#include <sstream>

namespace ptin {

namespace {

template <typename Seq>
std::optional<std::size_t> find_by_id(const Seq& items, const std::string& id) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].id == id) return i;
  }
  return std::nullopt;
}

std::string join_issues(const std::vector<std::string>& issues) {
  std::ostringstream out;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    if (i) out << '\n';
    out << issues[i];
  }
  return out.str();
}

}  // namespace

std::optional<std::size_t> Scenario::find_bus(const std::string& id) const {
  return find_by_id(pdn.buses, id);
}
std::optional<std::size_t> Scenario::find_line(const std::string& id) const {
  return find_by_id(pdn.lines, id);
}
std::optional<std::size_t> Scenario::find_junction(const std::string& id) const {
  return find_by_id(utn.junctions, id);
}
std::optional<std::size_t> Scenario::find_lane(const std::string& id) const {
  return find_by_id(utn.lanes, id);
}
std::optional<std::size_t> Scenario::find_vehicle(const std::string& id) const {
  return find_by_id(fleets.vehicles, id);
}
std::optional<std::size_t> Scenario::find_cn_node(const std::string& id) const {
  return find_by_id(cn, id);
}

std::vector<std::size_t> Scenario::stations() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pdn.buses.size(); ++i) {
    if (pdn.buses[i].is_v2gs) out.push_back(i);
  }
  return out;
}

std::optional<std::size_t> Scenario::set_off_warehouse() const {
  for (std::size_t i = 0; i < fleets.warehouses.size(); ++i) {
    if (fleets.warehouses[i].kind == WarehouseKind::set_off) return i;
  }
  return std::nullopt;
}

ScenarioError::ScenarioError(std::vector<std::string> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

}  // namespace ptin
