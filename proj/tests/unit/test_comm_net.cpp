#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "ptin/comm_net.hpp"

using namespace ptin;
using namespace ptin::comm;

namespace {

CnNode node(double x, double y, double range, bool central = false, bool energized = true) {
  CnNode n;
  n.id = "n";
  n.pos = snap({x, y});
  n.range_km = range;
  n.is_central = central;
  n.energized = energized;
  return n;
}

Connectivity solve(const std::vector<CnNode>& nodes, const CoverageMatrix& cov) {
  return solve_connectivity(nodes, cov);
}

}  // namespace

TEST_CASE("nodes 2.9 km apart with 3 km range are linked, never to themselves") {
  const std::vector<CnNode> nodes{node(0, 0, 3), node(2.9, 0, 3)};
  const auto cov = coverage_pairs(nodes, {}, {});
  CHECK(cov.link(0, 1));
  CHECK(cov.link(1, 0));
  CHECK_FALSE(cov.link(0, 0));
  CHECK_FALSE(cov.link(1, 1));
}

TEST_CASE("a link uses the larger of the two ranges") {
  const std::vector<CnNode> nodes{node(0, 0, 1), node(2.5, 0, 3), node(5, 0, 1)};
  const auto cov = coverage_pairs(nodes, {}, {});
  CHECK(cov.link(0, 1));
  CHECK(cov.link(1, 2));
  CHECK_FALSE(cov.link(0, 2));
}

TEST_CASE("exactly at range counts as covered") {
  const std::vector<CnNode> nodes{node(0, 0, 3)};
  const std::vector<Point> buses{{3.0, 0.0}, {3.001, 0.0}};
  const auto cov = coverage_pairs(nodes, buses, {});
  CHECK(cov.covers_bus(0, 0));
  CHECK_FALSE(cov.covers_bus(0, 1));
}

TEST_CASE("comm spreads from central nodes only through eligible nodes") {
  std::vector<CnNode> nodes{node(0, 0, 3, true), node(2.5, 0, 3), node(5, 0, 3, false, false),
                            node(7.5, 0, 3)};
  const auto cov = coverage_pairs(nodes, {}, {});
  auto c = solve(nodes, cov);
  CHECK(c.comm == std::vector<std::uint8_t>{1, 1, 0, 0});
  CHECK(validate_certificate(nodes, cov, c).empty());

  nodes[2].is_uav_backed = true;
  c = solve(nodes, cov);
  CHECK(c.comm == std::vector<std::uint8_t>{1, 1, 1, 1});
  CHECK(validate_certificate(nodes, cov, c).empty());
}

TEST_CASE("the link set is a forest with one link per non-central comm node") {
  const auto& s = fx::bundled();
  const auto cov = coverage_pairs(s.cn, {}, {});
  const auto c = solve(s.cn, cov);
  std::size_t comm_nodes = 0;
  std::size_t comm_centrals = 0;
  for (std::size_t a = 0; a < s.cn.size(); ++a) {
    comm_nodes += c.comm[a];
    comm_centrals += c.comm[a] && s.cn[a].is_central;
  }
  CHECK(c.links.size() == comm_nodes - comm_centrals);
  CHECK(validate_certificate(s.cn, cov, c).empty());
  CHECK(c.comm == oracle::comm_reachability(s.cn));
}

TEST_CASE("a corrupted certificate is caught") {
  const auto& s = fx::bundled();
  const auto cov = coverage_pairs(s.cn, {}, {});
  auto c = solve(s.cn, cov);
  REQUIRE_FALSE(c.links.empty());
  auto extra = c;
  bool added = false;
  for (std::size_t a = 0; a < s.cn.size() && !added; ++a) {
    for (std::size_t b = a + 1; b < s.cn.size() && !added; ++b) {
      if (c.comm[a] && c.comm[b] && cov.link(a, b) && !c.uses(a, b) && !c.uses(b, a)) {
        extra.links.push_back({a, b});
        added = true;
      }
    }
  }
  REQUIRE(added);
  CHECK_FALSE(validate_certificate(s.cn, cov, extra).empty());
  auto flipped = c;
  for (auto& f : flipped.comm) f = f ? 0 : 1;
  CHECK_FALSE(validate_certificate(s.cn, cov, flipped).empty());
}

TEST_CASE("bus and EV comm follow coverage by comm-normal nodes") {
  const std::vector<CnNode> nodes{node(0, 0, 3, true), node(10, 0, 3, false, false)};
  const std::vector<Point> pts{{1, 0}, {10, 1}, {20, 0}};
  const auto cov = coverage_pairs(nodes, pts, pts);
  const auto c = solve(nodes, cov);
  CHECK(derive_bus_comm(cov, c.comm) == std::vector<std::uint8_t>{1, 0, 0});
  CHECK(derive_ev_comm(cov, c.comm) == std::vector<std::uint8_t>{1, 0, 0});
  CHECK(derive_bus_comm(cov, c.comm) == oracle::covered_buses(nodes, c.comm, pts));
}

TEST_CASE("adding a UAV-backed node never removes comm") {
  const auto live = apply_damage(fx::bundled(), fx::bundled().damage);
  std::vector<Point> buses;
  for (const auto& b : live.pdn.buses) buses.push_back(b.pos);
  auto nodes = live.cn;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(0.0, 17.0), uy(0.0, 21.0);
  auto cov = coverage_pairs(nodes, buses, {});
  auto prev_nodes = solve(nodes, cov).comm;
  auto prev_buses = derive_bus_comm(cov, prev_nodes);
  for (int k = 0; k < 6; ++k) {
    CnNode u = node(ux(rng), uy(rng), 1.0);
    u.energized = false;
    u.is_uav_backed = true;
    nodes.push_back(u);
    cov = coverage_pairs(nodes, buses, {});
    const auto c = solve(nodes, cov);
    const auto bus_comm = derive_bus_comm(cov, c.comm);
    for (std::size_t a = 0; a < prev_nodes.size(); ++a) CHECK(c.comm[a] >= prev_nodes[a]);
    for (std::size_t i = 0; i < buses.size(); ++i) CHECK(bus_comm[i] >= prev_buses[i]);
    prev_nodes = c.comm;
    prev_buses = bus_comm;
  }
}

TEST_CASE("random small networks agree with plain reachability") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> coord(0.0, 8.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng() % 11;
    std::vector<CnNode> nodes;
    for (std::size_t a = 0; a < n; ++a) {
      CnNode x = node(coord(rng), coord(rng), 1.0 + static_cast<double>(rng() % 3));
      x.is_central = rng() % 5 == 0;
      x.energized = rng() % 4 != 0;
      // UAV nodes are never gateways.
      x.is_uav_backed = !x.is_central && !x.energized && rng() % 3 == 0;
      nodes.push_back(x);
    }
    std::vector<Point> pts;
    for (int i = 0; i < 6; ++i) pts.push_back(snap({coord(rng), coord(rng)}));
    const auto cov = coverage_pairs(nodes, pts, {});
    const auto c = solve(nodes, cov);
    CHECK(c.comm == oracle::comm_reachability(nodes));
    CHECK(validate_certificate(nodes, cov, c).empty());
    CHECK(derive_bus_comm(cov, c.comm) == oracle::covered_buses(nodes, c.comm, pts));
  }
}
