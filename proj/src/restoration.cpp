#include "ptin/restoration.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

#include "ptin/coupling.hpp"
#include "ptin/power_net.hpp"
#include "ptin/traffic_net.hpp"

namespace ptin::restore {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kOnlineKw = 1e-6;  // requirement that just brings a station online

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

enum class Status { pending, fired, skipped };

struct StepState {
  RecoveryStep step;
  Status status = Status::pending;
  double uav_end = -1.0;  // absolute work end of its workgroup, <0 when none
  bool uav_lost = false;  // needed UAV support that routing could not provide
};

struct StationState {
  double capacity_kw = 0.0;
  double picked_kw = 0.0;
  double enroute_kw = 0.0;
  std::size_t enroute = 0;
  double energy_kwh = 0.0;  // stored energy of arrived vehicles
  double served_kwh = 0.0;
  bool energy_warned = false;
};

struct Relay {
  double from_s = 0.0;
  std::string uav;
  Point pos;
  double range_km = 1.0;
};

struct Moving {
  std::size_t vehicle = kNone;
  std::size_t station = kNone;
  std::size_t destination = kNone;
  std::vector<std::size_t> lanes;
  std::size_t lane_pos = 0;
  bool crossing = false;
  std::size_t section = 0;
  double offset_km = 0.0;
  double eta_s = 0.0;
  bool arrived = false;
};

class Engine {
 public:
  Engine(const Scenario& scenario, Strategy strategy, const RunOptions& options)
      : strategy_(strategy), options_(options), live_(apply_damage(scenario, scenario.damage)) {
    params_ = live_.params;
    horizon_ = static_cast<long>(std::floor(options.horizon_s > 0 ? options.horizon_s
                                                                  : params_.horizon_s));
    horizon_ = std::max<long>(horizon_, 1);
    plan_opt_.udssf_cap = options.udssf_cap ? options.udssf_cap : params_.udssf_subset_cap;
    node_budget_ = options.routing_node_budget ? options.routing_node_budget
                                               : params_.routing_node_budget;
    result_.strategy = strategy;
    used_.assign(live_.fleets.vehicles.size(), 0);
    uav_free_.assign(live_.fleets.uavs.size(), 0.0);
  }

  RunResult run() {
    initialise();
    result_.curve_kw.assign(static_cast<std::size_t>(horizon_), 0.0);
    begin_stage(1);
    for (now_ = 1; now_ < horizon_; ++now_) {
      move_vehicles();
      activate_relays();
      progress();
      traffic::advance_traffic(live_.utn, params_, 1.0);
      account_energy();
      result_.curve_kw[static_cast<std::size_t>(now_)] = picked_total();
    }
    finish();
    return std::move(result_);
  }

 private:
  // -------------------------------------------------------------------------
  // Setup and bookkeeping

  void log(const std::string& kind, const std::string& element, const std::string& detail) {
    result_.events.push_back({static_cast<double>(now_), kind, element, detail});
  }

  void initialise() {
    now_ = 0;
    if (options_.loss_of_voltage_trip) {
      // Automated sectionalizers open on loss of voltage once both sides are dead.
      bool any = false;
      for (auto& line : live_.pdn.lines) {
        if (!line.equipment_ok || !line.switch_closed) continue;
        if (live_.pdn.buses[line.from].energized || live_.pdn.buses[line.to].energized) continue;
        line.switch_closed = false;
        any = true;
        log("loss_of_voltage_open", line.id, "");
      }
      if (any) refresh_coupled_state(live_);
    }
    for (const auto& b : live_.pdn.buses) {
      if (b.equipment_ok && !b.energized) result_.outage_load_kw += b.load_kw;
    }
    for (double f : facility_load_per_bus(live_)) result_.facility_load_kw += f;
    limits_ = limits();
    check_invariants("initial state");
  }

  std::vector<double> limits() const {
    std::vector<double> out;
    for (const auto& l : live_.utn.lanes) out.push_back(l.v_lmax_kmh);
    for (const auto& j : live_.utn.junctions) out.push_back(j.v_jmax_kmh);
    return out;
  }

  std::vector<double> lane_limits() const {
    std::vector<double> out;
    for (const auto& l : live_.utn.lanes) out.push_back(l.v_lmax_kmh);
    return out;
  }

  void record_monotone() {
    if (strategy_ != Strategy::a3 || stage_ != 1) return;
    std::size_t evs = 0;
    for (std::size_t z : dispatchable_evs(live_)) {
      if (live_.fleets.vehicles[z].kind == VehicleKind::ev) ++evs;
    }
    result_.dispatchable_trace.emplace_back(static_cast<double>(now_), evs);
    result_.lane_limit_trace.push_back(lane_limits());
  }

  void refresh() {
    refresh_coupled_state(live_);
    auto now_limits = limits();
    if (now_limits != limits_) {
      limits_ = std::move(now_limits);
      for (auto& m : moving_) {
        if (!m.arrived) reroute(m);
      }
    }
    record_monotone();
  }

  void check_invariants(const std::string& where) {
    const auto rad = power::check_radiality(live_.pdn);
    if (!rad.radial) result_.invariant_failures.push_back(where + ": PDN not radial");
    for (const auto& b : live_.pdn.buses) {
      if (b.load_switch_closed && !b.energized) {
        result_.invariant_failures.push_back(where + ": bus " + b.id +
                                             " serves load while de-energized");
      }
    }
  }

  double picked_total() const {
    double total = 0.0;
    for (const auto& [st, s] : stations_) total += s.picked_kw;
    return total;
  }

  // Power is the only hard constraint; running past the stored energy is
  // reported once per station.
  void account_energy() {
    for (auto& [bus, st] : stations_) {
      st.served_kwh += st.picked_kw / 3600.0;
      if (!st.energy_warned && st.served_kwh > st.energy_kwh + 1e-9) {
        st.energy_warned = true;
        log("energy_warning", live_.pdn.buses[bus].id,
            "served " + fmt(st.served_kwh) + " kWh exceeds the " + fmt(st.energy_kwh) +
                " kWh stored in arrived vehicles");
      }
    }
  }

  double facility_fraction() const {
    if (result_.facility_load_kw <= 0.0) return 1.0;
    double on = 0.0;
    for (const auto& n : live_.cn) {
      if (n.supply_bus != kNone && facility_powered(live_.pdn, n.supply_bus)) on += n.demand_kw;
    }
    for (const auto& j : live_.utn.junctions) {
      if (j.supply_bus != kNone && facility_powered(live_.pdn, j.supply_bus)) on += j.demand_kw;
    }
    for (const auto& l : live_.utn.lanes) {
      if (l.supply_bus != kNone && facility_powered(live_.pdn, l.supply_bus)) on += l.demand_kw;
    }
    return on / result_.facility_load_kw;
  }

  // -------------------------------------------------------------------------
  // Stages

  void begin_stage(int stage) {
    stage_ = stage;
    StagePlan plan;
    if (strategy_ == Strategy::a1) {
      plan = plan_upstream(live_, stage, plan_opt_);
    } else {
      plan = stage == 1 ? plan_stage1(live_, plan_opt_) : plan_stage2(live_, plan_opt_);
    }
    steps_.clear();
    queues_.clear();
    for (const auto& s : plan.steps) {
      steps_.push_back({s});
      queues_[s.station].push_back(s.index);
      if (s.station != kNone) stations_[s.station];
    }
    for (std::size_t b : plan.unrecoverable) {
      result_.unexecuted.push_back("stage " + std::to_string(stage) + " bus " +
                                   live_.pdn.buses[b].id + ": no DA path even with UAVs");
    }
    StageSummary summary;
    summary.stage = stage;
    summary.start_s = static_cast<double>(now_);
    summary.planned = plan.steps.size();
    result_.stages.push_back(summary);
    log("stage_start", "stage " + std::to_string(stage),
        std::to_string(plan.steps.size()) + " steps");
    for (const auto& d : plan.diagnostics) log("diagnostic", "stage " + std::to_string(stage), d);
    result_.plans.push_back(std::move(plan));
    record_monotone();

    dispatch_vehicles();
    plan_uavs();
  }

  void end_stage() {
    auto& summary = result_.stages.back();
    summary.end_s = static_cast<double>(now_);
    for (const auto& s : steps_) {
      if (s.status == Status::fired) ++summary.executed;
      if (s.status == Status::skipped) ++summary.unexecuted;
    }
    summary.facility_fraction_at_end = facility_fraction();
    log("stage_end", "stage " + std::to_string(stage_),
        std::to_string(summary.executed) + " executed, " + std::to_string(summary.unexecuted) +
            " unexecuted");
    if (stage_ == 1) {
      result_.facility_fraction_before_stage2 = summary.facility_fraction_at_end;
      begin_stage(2);
    } else {
      stage_ = 3;
    }
  }

  // -------------------------------------------------------------------------
  // MESR dispatch

  std::vector<std::size_t> station_order() const {
    std::vector<std::size_t> order;
    for (const auto& s : steps_) {
      const std::size_t st = s.step.station;
      if (st != kNone && std::find(order.begin(), order.end(), st) == order.end()) {
        order.push_back(st);
      }
    }
    return order;
  }

  // Requirements of the first `prefix` steps, net of what each station
  // already has or is about to receive.
  std::vector<double> requirements(const std::vector<std::size_t>& order, std::size_t prefix) {
    std::vector<double> req(order.size(), 0.0);
    std::vector<std::uint8_t> has_step(order.size(), 0);
    for (std::size_t i = 0; i < prefix && i < steps_.size(); ++i) {
      const auto& s = steps_[i].step;
      const auto it = std::find(order.begin(), order.end(), s.station);
      if (it == order.end()) continue;
      const auto k = static_cast<std::size_t>(it - order.begin());
      req[k] += s.demand_kw;
      has_step[k] = 1;
    }
    for (std::size_t k = 0; k < order.size(); ++k) {
      const auto& st = stations_[order[k]];
      const double surplus = st.capacity_kw + st.enroute_kw - st.picked_kw;
      req[k] = std::max(0.0, req[k] - surplus);
      if (has_step[k] && st.capacity_kw <= 0.0 && st.enroute == 0) {
        req[k] = std::max(req[k], kOnlineKw);
      }
    }
    return req;
  }

  void dispatch_vehicles() {
    const auto order = station_order();
    if (order.empty()) return;

    std::vector<std::size_t> pool;
    for (std::size_t z : dispatchable_evs(live_)) {
      const auto& v = live_.fleets.vehicles[z];
      if (used_[z] || v.junction == kNone) continue;
      if (strategy_ == Strategy::a2 && v.kind != VehicleKind::mess) continue;
      pool.push_back(z);
    }

    dispatch::DispatchInstance inst;
    inst.eta = params_.eta;
    for (std::size_t z : pool) {
      const auto& v = live_.fleets.vehicles[z];
      inst.vehicles.push_back({v.id, v.kind, v.output_kw});
    }
    for (std::size_t st : order) inst.stations.push_back({live_.pdn.buses[st].id, 0.0});
    using ClassKey = std::tuple<int, double, double, std::size_t>;
    std::map<ClassKey, std::vector<double>> cache;
    inst.travel_s.assign(pool.size() * order.size(), kInf);
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const auto& v = live_.fleets.vehicles[pool[i]];
      const auto cls = traffic::TravelClass::of(v);
      for (std::size_t k = 0; k < order.size(); ++k) {
        const auto access = live_.pdn.buses[order[k]].access_junction;
        if (!access) continue;
        const ClassKey key{static_cast<int>(cls.kind), cls.omega_lane, cls.omega_junction, *access};
        auto it = cache.find(key);
        if (it == cache.end()) it = cache.emplace(key, traffic::times_to(live_.utn, *access, cls)).first;
        inst.travel_s[i * order.size() + k] = it->second[v.junction];
      }
    }

    auto with_req = [&](const std::vector<double>& req) {
      for (std::size_t k = 0; k < order.size(); ++k) inst.stations[k].requirement_kw = req[k];
      return dispatch::solve(inst);
    };
    auto sol = with_req(requirements(order, steps_.size()));
    const bool prefix_mode = strategy_ == Strategy::a1 || stage_ == 1;
    if (!sol.feasible && prefix_mode) {
      // Serve the longest step prefix the fleet can cover in full.
      std::size_t lo = 0;
      std::size_t hi = steps_.size();
      while (lo < hi) {
        const std::size_t mid = (lo + hi + 1) / 2;
        if (with_req(requirements(order, mid)).feasible) {
          lo = mid;
        } else {
          hi = mid - 1;
        }
      }
      sol = with_req(requirements(order, lo));
      log("dispatch_shortfall", "stage " + std::to_string(stage_),
          "capacity covers the first " + std::to_string(lo) + " of " +
              std::to_string(steps_.size()) + " steps");
    }

    DispatchAudit audit;
    audit.stage = stage_;
    audit.time_s = static_cast<double>(now_);
    audit.violations = dispatch::validate(inst, sol);
    audit.instance = inst;
    audit.solution = sol;
    result_.audits.push_back(std::move(audit));

    for (std::size_t i = 0; i < pool.size(); ++i) {
      const std::size_t k = sol.station_of(i, order.size());
      if (k == kNone) continue;
      launch(pool[i], order[k], inst.time(i, k));
    }
  }

  void launch(std::size_t z, std::size_t station, double predicted_s) {
    auto& v = live_.fleets.vehicles[z];
    used_[z] = 1;
    v.assigned_station = station;
    Moving m;
    m.vehicle = z;
    m.station = station;
    m.destination = *live_.pdn.buses[station].access_junction;
    m.eta_s = static_cast<double>(now_) + predicted_s;
    const auto path = traffic::fastest_path(live_.utn, v.junction, m.destination,
                                            traffic::TravelClass::of(v));
    m.lanes = path.lanes;
    auto& st = stations_[station];
    st.enroute_kw += v.output_kw;
    ++st.enroute;
    log("dispatch", v.id, "to " + live_.pdn.buses[station].id + ", predicted arrival " +
                              fmt(m.eta_s) + " s");
    moving_.push_back(std::move(m));
  }

  void reroute(Moving& m) {
    const auto& v = live_.fleets.vehicles[m.vehicle];
    // The vehicle keeps its current lane and continues from the junction ahead.
    const std::size_t keep = std::min(m.lane_pos + 1, m.lanes.size());
    const std::size_t from = keep == 0 ? v.junction : live_.utn.lanes[m.lanes[keep - 1]].to;
    const auto path =
        traffic::fastest_path(live_.utn, from, m.destination, traffic::TravelClass::of(v));
    if (!path.reachable) return;
    m.lanes.resize(keep);
    m.lanes.insert(m.lanes.end(), path.lanes.begin(), path.lanes.end());
  }

  void move_vehicles() {
    for (auto& m : moving_) {
      if (m.arrived) continue;
      const auto& v = live_.fleets.vehicles[m.vehicle];
      double left_s = 1.0;
      while (left_s > 0.0 && m.lane_pos < m.lanes.size()) {
        const auto& lane = live_.utn.lanes[m.lanes[m.lane_pos]];
        double speed = 0.0;
        double length = 0.0;
        if (!m.crossing) {
          const auto& sec = lane.sections[m.section];
          speed = traffic::class_speed(sec.speed_kmh, lane.prescribed_kmh, v.kind, v.omega_lane);
          length = sec.length_km;
        } else {
          const auto& j = live_.utn.junctions[lane.to];
          speed = traffic::class_speed(j.v_jmax_kmh, j.prescribed_kmh, v.kind, v.omega_junction);
          length = j.crossing_length_km;
        }
        const double need_s = speed > 0.0 ? (length - m.offset_km) / speed * 3600.0 : kInf;
        if (need_s > left_s) {
          m.offset_km += speed * left_s / 3600.0;
          left_s = 0.0;
          break;
        }
        left_s -= std::max(0.0, need_s);
        m.offset_km = 0.0;
        if (!m.crossing) {
          if (++m.section >= lane.sections.size()) m.crossing = true;
        } else {
          m.crossing = false;
          m.section = 0;
          ++m.lane_pos;
        }
      }
      if (m.lane_pos >= m.lanes.size()) arrive(m);
    }
  }

  void arrive(Moving& m) {
    m.arrived = true;
    const auto& v = live_.fleets.vehicles[m.vehicle];
    auto& st = stations_[m.station];
    st.capacity_kw += v.output_kw;
    st.energy_kwh += v.energy_kwh;
    st.enroute_kw -= v.output_kw;
    --st.enroute;
    auto& bus = live_.pdn.buses[m.station];
    log("arrival", v.id, "at " + bus.id + ", capacity " + fmt(st.capacity_kw) + " kW");
    if (!bus.station_online) {
      bus.station_online = true;
      refresh();
      check_invariants("station " + bus.id + " online");
      log("station_online", bus.id, "");
    }
  }

  // -------------------------------------------------------------------------
  // UAV support

  void plan_uavs() {
    std::vector<std::size_t> need;
    for (std::size_t i = 0; i < steps_.size(); ++i) {
      if (!steps_[i].step.uav_sites.empty()) need.push_back(i);
    }
    if (need.empty()) return;
    const auto set_off = live_.set_off_warehouse();
    const double t0 = static_cast<double>(now_);
    predict_ready_times();

    std::size_t available = 0;
    for (double f : uav_free_) available += std::isfinite(f) ? 1 : 0;
    std::vector<std::size_t> groups;
    for (std::size_t i : need) {
      const auto& s = steps_[i].step;
      if (!set_off || available == 0 || !std::isfinite(s.ready_s) ||
          s.uav_sites.size() > available || !reachable_by_uav(s.uav_sites)) {
        steps_[i].uav_lost = true;
        continue;
      }
      groups.push_back(i);
    }

    while (!groups.empty()) {
      auto inst = routing_instance(groups, t0);
      auto sol = uav::solve_routing(inst);
      if (sol.feasible) {
        adopt_routes(groups, inst, sol, t0);
        return;
      }
      if (sol.failure.find("node budget") != std::string::npos) {
        route_one_by_one(groups, t0);
        return;
      }
      // Drop the workgroup holding the named site, else the last one.
      std::size_t drop = groups.size() - 1;
      for (std::size_t g = 0; g < groups.size(); ++g) {
        for (std::size_t j = 0; j < steps_[groups[g]].step.uav_sites.size(); ++j) {
          if (sol.failure.find("site " + site_id(groups[g], j) + " ") != std::string::npos) {
            drop = g;
          }
        }
      }
      steps_[groups[drop]].uav_lost = true;
      log("uav_infeasible", step_name(groups[drop]), sol.failure);
      groups.erase(groups.begin() + static_cast<long>(drop));
    }
  }

  bool reachable_by_uav(const std::vector<Point>& sites) const {
    const auto& uav = live_.fleets.uavs.front();
    const Point home = live_.fleets.warehouses[*live_.set_off_warehouse()].pos;
    for (const auto& p : sites) {
      bool ok = 2.0 * distance_km(home, p) <= uav.range_budget_km;
      for (const auto& w : live_.fleets.warehouses) {
        if (w.kind != WarehouseKind::battery_swap) continue;
        ok = ok || (distance_km(home, w.pos) <= uav.range_budget_km &&
                    2.0 * distance_km(w.pos, p) <= uav.range_budget_km);
      }
      if (!ok) return false;
    }
    return true;
  }

  static std::string site_id(std::size_t step, std::size_t j) {
    return "step" + std::to_string(step) + "/" + std::to_string(j);
  }

  std::string step_name(std::size_t i) const {
    const auto& s = steps_[i].step;
    std::string what = step_kind_name(s.kind);
    if (s.line != kNone) what += " " + live_.pdn.lines[s.line].id;
    if (s.bus != kNone) what += " bus " + live_.pdn.buses[s.bus].id;
    return "stage " + std::to_string(s.stage) + " step " + std::to_string(s.index) + " (" + what +
           ")";
  }

  uav::RoutingInstance routing_instance(const std::vector<std::size_t>& groups, double t0) const {
    uav::RoutingInstance inst;
    inst.hover_equiv_kmh = params_.uav_hover_equiv_kmh;
    inst.node_budget = node_budget_;
    const auto& home = live_.fleets.warehouses[*live_.set_off_warehouse()];
    inst.sites.push_back({home.id, uav::SiteKind::set_off, home.pos, kNone, 0.0});
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto& s = steps_[groups[g]].step;
      uav::Workgroup wg;
      wg.ready_s = std::max(0.0, s.ready_s - t0);
      wg.work_s = params_.uav_work_duration_s;
      for (std::size_t j = 0; j < s.uav_sites.size(); ++j) {
        wg.sites.push_back(inst.sites.size());
        inst.sites.push_back({site_id(groups[g], j), uav::SiteKind::deployment, s.uav_sites[j], g,
                              0.0});
      }
      inst.groups.push_back(std::move(wg));
    }
    for (const auto& w : live_.fleets.warehouses) {
      if (w.kind != WarehouseKind::battery_swap) continue;
      inst.sites.push_back({w.id, uav::SiteKind::battery_swap, w.pos, kNone, w.swap_duration_s});
    }
    for (std::size_t u = 0; u < live_.fleets.uavs.size(); ++u) {
      if (!std::isfinite(uav_free_[u])) continue;  // relaying
      const auto& uav = live_.fleets.uavs[u];
      inst.uavs.push_back({uav.id, uav.speed_kmh, uav.per_km_draw(),
                           std::max(0.0, uav_free_[u] - t0)});
    }
    return inst;
  }

  void adopt_routes(const std::vector<std::size_t>& groups, const uav::RoutingInstance& inst,
                    const uav::RouteSolution& sol, double t0) {
    result_.stages.back().routing_optimal = result_.stages.back().routing_optimal && sol.optimal;
    std::vector<double> latest(groups.size(), 0.0);
    for (const auto& route : sol.routes) {
      if (route.visits.empty()) continue;
      UavTrace trace;
      trace.stage = stage_;
      trace.uav = inst.uavs[route.uav].id;
      for (auto v : route.visits) {
        const auto& site = inst.sites[v.site];
        if (site.kind == uav::SiteKind::deployment) {
          latest[site.group] = std::max(latest[site.group], v.arrive_s);
        }
        v.arrive_s += t0;
        v.depart_s += t0;
        trace.visits.push_back(v);
        trace.site_ids.push_back(site.id);
        trace.site_pos.push_back(site.pos);
      }
      const std::size_t u = fleet_index(trace.uav);
      if (options_.uav_persist) stay_on_station(trace, u);
      uav_free_[u] = options_.uav_persist ? std::numeric_limits<double>::infinity()
                                          : std::max(uav_free_[u], trace.visits.back().arrive_s);
      result_.uav_traces.push_back(std::move(trace));
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
      auto& s = steps_[groups[g]];
      s.uav_end = t0 + latest[g] + inst.groups[g].work_s;
      log("uav_group", step_name(groups[g]),
          std::to_string(inst.groups[g].sites.size()) + " sites, work ends " + fmt(s.uav_end) +
              " s");
    }
  }

  // Cuts the trace after the last deployment visit and queues a relay there.
  void stay_on_station(UavTrace& trace, std::size_t u) {
    std::size_t last = kNone;
    for (std::size_t k = 0; k < trace.visits.size(); ++k) {
      if (trace.site_ids[k].rfind("step", 0) == 0) last = k;
    }
    if (last == kNone) return;
    trace.visits.resize(last + 1);
    trace.site_ids.resize(last + 1);
    trace.site_pos.resize(last + 1);
    const auto& uav = live_.fleets.uavs[u];
    relays_.push_back({trace.visits[last].depart_s, uav.id, trace.site_pos[last], uav.cn_range_km});
    std::stable_sort(relays_.begin(), relays_.end(),
                     [](const Relay& a, const Relay& b) { return a.from_s < b.from_s; });
  }

  void activate_relays() {
    bool added = false;
    while (!relays_.empty() && relays_.front().from_s <= static_cast<double>(now_)) {
      const auto r = relays_.front();
      relays_.erase(relays_.begin());
      CnNode node;
      node.id = "relay-" + r.uav;
      node.pos = snap(r.pos);
      node.range_km = r.range_km;
      node.is_uav_backed = true;
      live_.cn.push_back(node);
      log("uav_relay", r.uav, "on station at (" + fmt(node.pos.x_km) + ", " +
                                  fmt(node.pos.y_km) + ")");
      added = true;
    }
    if (added) refresh_coupled_state(live_);
  }

  std::size_t fleet_index(const std::string& id) const {
    for (std::size_t u = 0; u < live_.fleets.uavs.size(); ++u) {
      if (live_.fleets.uavs[u].id == id) return u;
    }
    return 0;
  }

  // Fallback when the joint search exceeds its budget: route each workgroup
  // on its own, chaining availability and group order.
  void route_one_by_one(const std::vector<std::size_t>& groups, double t0) {
    result_.stages.back().routing_optimal = false;
    log("uav_budget", "stage " + std::to_string(stage_),
        "joint routing exceeded the node budget; groups routed one at a time");
    double prev_end = t0;
    for (std::size_t g : groups) {
      auto inst = routing_instance({g}, t0);
      inst.groups[0].ready_s = std::max(inst.groups[0].ready_s, prev_end - t0);
      const auto sol = uav::solve_routing(inst);
      if (!sol.feasible) {
        steps_[g].uav_lost = true;
        log("uav_infeasible", step_name(g), sol.failure);
        continue;
      }
      adopt_routes({g}, inst, sol, t0);
      prev_end = steps_[g].uav_end;
    }
  }

  // Station ready time of every step from the predicted arrivals.
  void predict_ready_times() {
    std::map<std::size_t, std::vector<std::pair<double, double>>> arrivals;
    for (const auto& m : moving_) {
      if (m.arrived) continue;
      arrivals[m.station].emplace_back(m.eta_s, live_.fleets.vehicles[m.vehicle].output_kw);
    }
    for (auto& [st, list] : arrivals) std::sort(list.begin(), list.end());
    std::map<std::size_t, double> demand;
    for (auto& s : steps_) {
      auto& step = s.step;
      if (step.station == kNone) {
        step.ready_s = static_cast<double>(now_);
        continue;
      }
      const auto& st = stations_[step.station];
      demand[step.station] += step.demand_kw;
      const double need = st.picked_kw + demand[step.station];
      double cap = st.capacity_kw;
      double t = static_cast<double>(now_);
      if (cap <= 0.0 || cap + 1e-9 < need) {
        t = kInf;
        for (const auto& [eta, kw] : arrivals[step.station]) {
          cap += kw;
          if (cap > 0.0 && cap + 1e-9 >= need) {
            t = std::max(eta, static_cast<double>(now_));
            break;
          }
        }
      }
      step.ready_s = t;
    }
  }

  // -------------------------------------------------------------------------
  // Step execution

  enum class Block { none, station, da, capacity, uav, state };

  Block blocked(const StepState& s, const std::vector<std::size_t>& sob) const {
    const auto& step = s.step;
    const auto& pdn = live_.pdn;
    std::vector<std::uint8_t> comm;
    for (const auto& b : pdn.buses) comm.push_back(b.comm ? 1 : 0);
    const bool uav_ok = s.uav_end >= 0.0 && static_cast<double>(now_) >= s.uav_end;
    if (s.uav_end >= 0.0 && !uav_ok) return Block::uav;

    if (step.kind == StepKind::open_line) {
      const auto& line = pdn.lines[step.line];
      if (!line.equipment_ok || !line.switch_closed) return Block::state;
      if (!uav_ok && !power::control_feasible(line, power::SwitchAction::open, comm).feasible) {
        return Block::da;
      }
      return Block::none;
    }
    const auto& st = stations_.at(step.station);
    if (!pdn.buses[step.station].station_online) return Block::station;
    if (step.kind == StepKind::close_line) {
      const auto& line = pdn.lines[step.line];
      if (!line.equipment_ok || line.switch_closed) return Block::state;
      const std::size_t lit = line.other(step.bus);
      if (sob[lit] != step.station || pdn.buses[step.bus].energized) return Block::state;
      if (!power::close_keeps_radial(pdn, step.line)) return Block::state;
      if (!uav_ok && !power::control_feasible(line, power::SwitchAction::close, comm).feasible) {
        return Block::da;
      }
    } else {
      const auto& bus = pdn.buses[step.bus];
      if (sob[step.bus] != step.station || bus.load_switch_closed) return Block::state;
      if (!uav_ok && !bus.comm) return Block::da;
    }
    if (st.capacity_kw - st.picked_kw + 1e-9 < step.demand_kw) return Block::capacity;
    return Block::none;
  }

  void fire(StepState& s) {
    auto& step = s.step;
    auto& pdn = live_.pdn;
    double picked = 0.0;
    if (step.kind == StepKind::open_line) {
      pdn.lines[step.line].switch_closed = false;
      refresh();
    } else {
      if (step.kind == StepKind::close_line) {
        pdn.lines[step.line].switch_closed = true;
        refresh();
      }
      for (std::size_t b : step.load_buses) {
        if (!pdn.buses[b].energized || pdn.buses[b].load_switch_closed) continue;
        pdn.buses[b].load_switch_closed = true;
        picked += pdn.buses[b].load_kw;
      }
      refresh();
      stations_[step.station].picked_kw += picked;
    }
    s.status = Status::fired;
    const std::size_t idx = step.index;
    check_invariants(step_name(idx));
    std::string element = step.line != kNone ? pdn.lines[step.line].id : pdn.buses[step.bus].id;
    log("step", element,
        "stage " + std::to_string(step.stage) + " #" + std::to_string(idx) + " " +
            step_kind_name(step.kind) + ", +" + fmt(picked) + " kW" +
            (s.uav_end >= 0.0 ? ", UAV-assisted" : ""));
  }

  void skip(StepState& s, const std::string& why) {
    s.status = Status::skipped;
    result_.unexecuted.push_back(step_name(s.step.index) + ": " + why);
    log("unexecuted", step_name(s.step.index), why);
  }

  static const char* block_reason(Block b) {
    switch (b) {
      case Block::station: return "station never came online";
      case Block::da: return "no communication for DA and no UAV support";
      case Block::capacity: return "insufficient residual capacity at the station";
      case Block::uav: return "UAV workgroup not finished";
      case Block::state: return "network state no longer allows the operation";
      case Block::none: break;
    }
    return "";
  }

  bool anything_pending() const {
    for (const auto& m : moving_) {
      if (!m.arrived) return true;
    }
    for (const auto& s : steps_) {
      if (s.status == Status::pending && s.uav_end >= 0.0 &&
          static_cast<double>(now_) < s.uav_end) {
        return true;
      }
    }
    return false;
  }

  bool fire_ready() {
    bool any = false;
    bool again = true;
    while (again) {
      again = false;
      const auto sob = station_of_buses(live_);
      for (auto& [station, queue] : queues_) {
        while (!queue.empty() && steps_[queue.front()].status != Status::pending) queue.pop_front();
        if (queue.empty()) continue;
        auto& s = steps_[queue.front()];
        const Block b = blocked(s, sob);
        if (b == Block::none) {
          fire(s);
          queue.pop_front();
          any = again = true;
          break;  // microgrids changed; recompute ownership
        }
        if (b == Block::capacity && station != kNone && stations_[station].enroute == 0) {
          skip(s, block_reason(b));
          queue.pop_front();
          again = true;
          break;
        }
      }
    }
    return any;
  }

  void progress() {
    if (stage_ > 2) return;
    while (true) {
      fire_ready();
      bool done = true;
      for (const auto& s : steps_) done = done && s.status != Status::pending;
      if (done) {
        end_stage();
        if (stage_ > 2) return;
        continue;
      }
      if (anything_pending()) return;
      // Nothing can change any more: give up on the earliest blocked step.
      const auto sob = station_of_buses(live_);
      std::size_t first = kNone;
      for (const auto& [station, queue] : queues_) {
        if (queue.empty()) continue;
        first = std::min(first, queue.front());
      }
      if (first == kNone) return;
      auto& s = steps_[first];
      const Block b = blocked(s, sob);
      skip(s, block_reason(b == Block::none ? Block::state : b));
      queues_[s.step.station].pop_front();
    }
  }

  void finish() {
    if (stage_ <= 2) {
      for (const auto& s : steps_) {
        if (s.status == Status::pending) {
          result_.unexecuted.push_back(step_name(s.step.index) + ": horizon reached");
        }
      }
      if (!result_.stages.empty() && result_.stages.back().end_s < 0.0) {
        auto& summary = result_.stages.back();
        for (const auto& s : steps_) {
          if (s.status == Status::fired) ++summary.executed;
          if (s.status != Status::fired) ++summary.unexecuted;
        }
        summary.facility_fraction_at_end = facility_fraction();
      }
    }
    for (const auto& lane : live_.utn.lanes) {
      double veh = 0.0;
      for (const auto& sec : lane.sections) veh += sec.vehicles;
      result_.final_lane_density.push_back(lane.length_km > 0 ? veh / lane.length_km : 0.0);
    }
  }

  Strategy strategy_;
  RunOptions options_;
  Scenario live_;
  Params params_;
  PlanOptions plan_opt_;
  std::size_t node_budget_ = 0;
  long horizon_ = 1;
  long now_ = 0;
  int stage_ = 0;
  RunResult result_;
  std::vector<double> limits_;
  std::vector<std::uint8_t> used_;
  std::vector<double> uav_free_;
  std::vector<Relay> relays_;  // pending, in activation order
  std::map<std::size_t, StationState> stations_;
  std::vector<Moving> moving_;
  std::vector<StepState> steps_;
  std::map<std::size_t, std::deque<std::size_t>> queues_;
};

}  // namespace

double RunResult::time_to_fraction(double fraction) const {
  const double target = fraction * final_kw();
  if (final_kw() <= 0.0) return 0.0;
  for (std::size_t t = 0; t < curve_kw.size(); ++t) {
    if (curve_kw[t] + 1e-9 >= target) return static_cast<double>(t);
  }
  return static_cast<double>(curve_kw.size());
}

std::size_t RunResult::executed_steps() const {
  std::size_t n = 0;
  for (const auto& s : stages) n += s.executed;
  return n;
}

RunResult run(const Scenario& scenario, Strategy strategy, const RunOptions& options) {
  return Engine(scenario, strategy, options).run();
}

}  // namespace ptin::restore
