#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "ptin/traffic_net.hpp"

using namespace ptin;
using namespace ptin::traffic;

namespace {

struct Net {
  UtnState utn;
  Params params;

  std::size_t junction(double x, double y) {
    TrafficJunction j;
    j.id = "j" + std::to_string(utn.junctions.size());
    j.pos = {x, y};
    j.energized = true;
    j.prescribed_kmh = params.junction_limit_kmh;
    j.degraded_factor = params.junction_degraded_kmh / params.junction_limit_kmh;
    utn.junctions.push_back(j);
    return utn.junctions.size() - 1;
  }

  std::size_t lane(std::size_t a, std::size_t b, std::vector<double> sections,
                   double vehicles = 0.0) {
    TrafficLane l;
    l.id = "l" + std::to_string(utn.lanes.size());
    l.from = a;
    l.to = b;
    l.energized = true;
    l.prescribed_kmh = params.lane_limit_kmh;
    l.degraded_factor = params.lane_degraded_kmh / params.lane_limit_kmh;
    for (double len : sections) {
      LaneSection s;
      s.length_km = len;
      l.length_km += len;
      l.sections.push_back(s);
    }
    for (auto& s : l.sections) s.vehicles = vehicles * s.length_km / l.length_km;
    utn.lanes.push_back(l);
    return utn.lanes.size() - 1;
  }

  void refresh() { update_speed_limits(utn, params); }
};

const TravelClass kEv{VehicleKind::ev, 0.0, 0.0};
const TravelClass kMess{VehicleKind::mess, 0.4, 0.4};

}  // namespace

TEST_CASE("speed limits follow facility energization") {
  CHECK(facility_limit(true, 60.0, 25.0 / 60.0) == doctest::Approx(60.0));
  CHECK(facility_limit(false, 60.0, 25.0 / 60.0) == doctest::Approx(25.0));
  CHECK(facility_limit(true, 30.0, 3.3 / 30.0) == doctest::Approx(30.0));
  CHECK(facility_limit(false, 30.0, 3.3 / 30.0) == doctest::Approx(3.3));
}

TEST_CASE("free-flow lane times for a 1 km lane") {
  Net net;
  const auto a = net.junction(0, 0);
  const auto b = net.junction(1, 0);
  const auto l = net.lane(a, b, {1.0});
  net.refresh();
  CHECK(lane_travel_time(net.utn.lanes[l], VehicleKind::ev, 0.0) == doctest::Approx(60.0));
  CHECK(lane_travel_time(net.utn.lanes[l], VehicleKind::mess, 0.4) == doctest::Approx(60.0));

  net.utn.lanes[l].energized = false;
  CHECK(update_speed_limits(net.utn, net.params));
  CHECK(net.utn.lanes[l].v_lmax_kmh == doctest::Approx(25.0));
  CHECK(lane_travel_time(net.utn.lanes[l], VehicleKind::ev, 0.0) == doctest::Approx(144.0));
  CHECK(lane_travel_time(net.utn.lanes[l], VehicleKind::mess, 0.4) ==
        doctest::Approx(3600.0 / 35.0));
  CHECK_FALSE(update_speed_limits(net.utn, net.params));
}

TEST_CASE("a MESS is never slower than an EV") {
  for (double avg : {1.0, 3.0, 10.0, 25.0, 42.9, 59.0, 60.0}) {
    for (double omega : {0.0, 0.2, 0.4, 1.0}) {
      const double ev = class_speed(avg, 60.0, VehicleKind::ev, omega);
      const double mess = class_speed(avg, 60.0, VehicleKind::mess, omega);
      CHECK(mess >= ev);
      CHECK(mess <= std::max(60.0, avg));
    }
  }
}

TEST_CASE("speeds equal limits without traffic and hit the floor at jam density") {
  Net net;
  const auto a = net.junction(0, 0);
  const auto b = net.junction(2, 0);
  const auto empty = net.lane(a, b, {1.0, 1.0});
  const auto jammed = net.lane(b, a, {2.0}, 2.0 * net.params.jam_density_veh_per_km);
  net.refresh();
  for (const auto& s : net.utn.lanes[empty].sections) CHECK(s.speed_kmh == 60.0);
  CHECK(net.utn.lanes[jammed].sections[0].speed_kmh == net.params.speed_floor_kmh);
}

TEST_CASE("fastest path on a diamond prefers the lit branch") {
  Net net;
  const auto s = net.junction(0, 0);
  const auto up = net.junction(1, 1);
  const auto down = net.junction(1, -1);
  const auto t = net.junction(2, 0);
  net.lane(s, up, {1.4});
  const auto up_t = net.lane(up, t, {1.4});
  net.lane(s, down, {1.5});
  net.lane(down, t, {1.5});
  net.refresh();
  auto p = fastest_path(net.utn, s, t, kEv);
  REQUIRE(p.reachable);
  CHECK(p.junctions == std::vector<std::size_t>{s, up, t});
  CHECK(p.time_s == doctest::Approx(oracle::path_exhaustive(net.utn, s, t, kEv)));

  net.utn.lanes[up_t].energized = false;
  net.refresh();
  p = fastest_path(net.utn, s, t, kEv);
  CHECK(p.junctions == std::vector<std::size_t>{s, down, t});
  CHECK(p.time_s == doctest::Approx(oracle::path_exhaustive(net.utn, s, t, kEv)));
  CHECK(times_to(net.utn, t, kEv)[s] == doctest::Approx(p.time_s));
}

TEST_CASE("equal-time paths break ties on junction order") {
  Net net;
  const auto s = net.junction(0, 0);
  const auto b = net.junction(1, 1);
  const auto a = net.junction(1, -1);
  const auto t = net.junction(2, 0);
  net.lane(s, b, {1.0});
  net.lane(b, t, {1.0});
  net.lane(s, a, {1.0});
  net.lane(a, t, {1.0});
  net.refresh();
  const auto p = fastest_path(net.utn, s, t, kEv);
  CHECK(p.junctions == std::vector<std::size_t>{s, std::min(a, b), t});
}

TEST_CASE("unreachable destinations are reported") {
  Net net;
  const auto a = net.junction(0, 0);
  const auto b = net.junction(1, 0);
  net.lane(b, a, {1.0});
  net.refresh();
  CHECK_FALSE(fastest_path(net.utn, a, b, kEv).reachable);
  CHECK(std::isinf(times_to(net.utn, b, kEv)[a]));
  CHECK(fastest_path(net.utn, a, a, kEv).time_s == 0.0);
}

TEST_CASE("random small networks agree with exhaustive path search") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> len(0.2, 2.0);
  for (int trial = 0; trial < 150; ++trial) {
    Net net;
    const std::size_t n = 3 + rng() % 6;
    for (std::size_t i = 0; i < n; ++i) net.junction(static_cast<double>(i), 0.0);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (a != b && rng() % 3 == 0) {
          const auto l = net.lane(a, b, {len(rng)}, static_cast<double>(rng() % 200));
          net.utn.lanes[l].energized = rng() % 2 == 0;
        }
      }
    }
    for (auto& j : net.utn.junctions) j.energized = rng() % 2 == 0;
    net.refresh();
    const std::size_t o = rng() % n;
    const std::size_t d = rng() % n;
    for (const auto& cls : {kEv, kMess}) {
      const auto p = fastest_path(net.utn, o, d, cls);
      const double ref = oracle::path_exhaustive(net.utn, o, d, cls);
      if (std::isinf(ref)) {
        CHECK_FALSE(p.reachable);
      } else {
        REQUIRE(p.reachable);
        CHECK(p.time_s == doctest::Approx(ref).epsilon(1e-9));
        CHECK(times_to(net.utn, d, cls)[o] == doctest::Approx(ref).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("background traffic conserves vehicles") {
  auto utn = apply_damage(fx::bundled(), fx::bundled().damage).utn;
  const auto& params = fx::bundled().params;
  const double start = background_vehicle_count(utn);
  CHECK(start > 2000.0);
  for (int k = 0; k < 1000; ++k) {
    advance_traffic(utn, params, 1.0);
    refresh_travel_times(utn, params);
  }
  CHECK(background_vehicle_count(utn) == doctest::Approx(start).epsilon(1e-9));
  for (const auto& l : utn.lanes) {
    for (const auto& s : l.sections) {
      CHECK(s.vehicles >= 0.0);
      CHECK(s.speed_kmh >= params.speed_floor_kmh);
      CHECK(s.speed_kmh <= l.v_lmax_kmh);
    }
  }
}

TEST_CASE("lighting more facilities never slows a trip") {
  const auto live = apply_damage(fx::bundled(), fx::bundled().damage);
  auto utn = live.utn;
  std::mt19937_64 rng(29);
  auto before = times_to(utn, 0, kMess);
  for (int k = 0; k < 30; ++k) {
    if (rng() % 2) {
      utn.lanes[rng() % utn.lanes.size()].energized = true;
    } else {
      utn.junctions[rng() % utn.junctions.size()].energized = true;
    }
    update_speed_limits(utn, live.params);
    const auto after = times_to(utn, 0, kMess);
    for (std::size_t j = 0; j < after.size(); ++j) CHECK(after[j] <= before[j] + 1e-9);
    before = after;
  }
}
