#include "ptin/comm_net.hpp"

#include <cmath>
#include <deque>
#include <sstream>

#include "ptin/kernels.hpp"

namespace ptin::comm {

namespace {

struct MetreCoords {
  std::vector<double> xs;
  std::vector<double> ys;
};

template <typename Range, typename Proj>
MetreCoords to_metres(const Range& items, Proj proj) {
  MetreCoords out;
  out.xs.reserve(items.size());
  out.ys.reserve(items.size());
  for (const auto& item : items) {
    const Point p = proj(item);
    out.xs.push_back(std::round(p.x_km * 1000.0));
    out.ys.push_back(std::round(p.y_km * 1000.0));
  }
  return out;
}

void cover_layer(std::span<const CnNode> nodes, const MetreCoords& targets,
                 std::vector<std::uint8_t>& layer) {
  const std::size_t n = nodes.size();
  const std::size_t m = targets.xs.size();
  layer.assign(m * n, 0);
  std::vector<std::uint8_t> mask(m);
  for (std::size_t a = 0; a < n; ++a) {
    const double cx = std::round(nodes[a].pos.x_km * 1000.0);
    const double cy = std::round(nodes[a].pos.y_km * 1000.0);
    kernels::coverage_mask(targets.xs, targets.ys, cx, cy,
                           std::round(nodes[a].range_km * 1000.0), mask);
    for (std::size_t t = 0; t < m; ++t) layer[t * n + a] = mask[t];
  }
}

}  // namespace

CoverageMatrix coverage_pairs(std::span<const CnNode> nodes, std::span<const Point> buses,
                              std::span<const Point> evs) {
  CoverageMatrix cov;
  cov.nodes = nodes.size();
  cov.buses = buses.size();
  cov.evs = evs.size();

  const auto node_xy = to_metres(nodes, [](const CnNode& c) { return c.pos; });
  // own[b * n + a]: b lies within a's range. The link uses the larger range,
  // i.e. either endpoint's disc reaching the other.
  std::vector<std::uint8_t> own;
  cover_layer(nodes, node_xy, own);
  const std::size_t n = cov.nodes;
  cov.node_node.assign(n * n, 0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      cov.node_node[a * n + b] = own[b * n + a] | own[a * n + b];
    }
  }

  cover_layer(nodes, to_metres(buses, [](Point p) { return p; }), cov.bus_node);
  cover_layer(nodes, to_metres(evs, [](Point p) { return p; }), cov.ev_node);
  return cov;
}

bool Connectivity::uses(std::size_t a, std::size_t b) const {
  for (const auto& [p, c] : links) {
    if ((p == a && c == b) || (p == b && c == a)) return true;
  }
  return false;
}

Connectivity solve_connectivity(std::span<const CnNode> nodes, const CoverageMatrix& cov) {
  const std::size_t n = nodes.size();
  Connectivity out;
  out.comm.assign(n, 0);
  out.flow.assign(n * n, 0.0);
  out.injection.assign(n, 0.0);
  out.big_m = static_cast<double>(n + 1);

  // Multi-source BFS from every energized central node, in index order.
  std::vector<std::size_t> parent(n, kNone);
  std::vector<std::size_t> order;
  std::deque<std::size_t> queue;
  for (std::size_t a = 0; a < n; ++a) {
    if (nodes[a].is_central && nodes[a].energized) {
      out.comm[a] = 1;
      queue.push_back(a);
    }
  }
  while (!queue.empty()) {
    const std::size_t a = queue.front();
    queue.pop_front();
    order.push_back(a);
    for (std::size_t b = 0; b < n; ++b) {
      if (out.comm[b] || !nodes[b].eligible() || !cov.link(a, b)) continue;
      out.comm[b] = 1;
      parent[b] = a;
      out.links.emplace_back(a, b);
      queue.push_back(b);
    }
  }

  // Each comm-normal non-central node absorbs one unit; flows carry subtree
  // sizes from the central roots outward.
  std::vector<double> subtree(n, 0.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::size_t a = *it;
    subtree[a] += 1.0;
    if (parent[a] != kNone) {
      const std::size_t p = parent[a];
      subtree[p] += subtree[a];
      out.flow[p * n + a] = subtree[a];
      out.flow[a * n + p] = -subtree[a];
    }
  }
  for (std::size_t a = 0; a < n; ++a) {
    if (out.comm[a] && parent[a] == kNone) {
      // Root: net outflow equals its subtree minus itself, plus its own unit.
      out.injection[a] = subtree[a];
    }
  }
  return out;
}

std::vector<std::string> validate_certificate(std::span<const CnNode> nodes,
                                              const CoverageMatrix& cov,
                                              const Connectivity& cert) {
  const std::size_t n = nodes.size();
  const double m = cert.big_m;
  constexpr double eps = 1e-9;
  std::vector<std::string> issues;
  auto fail = [&](const std::string& what) { issues.push_back(what); };

  std::vector<std::uint8_t> g(n * n, 0);
  for (const auto& [a, b] : cert.links) {
    g[a * n + b] = 1;
    g[b * n + a] = 1;
  }
  for (std::size_t a = 0; a < n; ++a) {
    if (g[a * n + a]) fail("self link on " + nodes[a].id);
    if (cert.comm[a] && !nodes[a].eligible()) {
      fail("node " + nodes[a].id + " communicates without power or UAV backing");
    }
    for (std::size_t b = 0; b < n; ++b) {
      const double f_ab = cert.flow[a * n + b];
      const double f_ba = cert.flow[b * n + a];
      if (g[a * n + b] && !cov.link(a, b)) {
        fail("link " + nodes[a].id + "-" + nodes[b].id + " used out of coverage");
      }
      if (std::abs(f_ab + f_ba) > eps) {
        fail("flow not antisymmetric on " + nodes[a].id + "-" + nodes[b].id);
      }
      if (std::abs(f_ab) > m * g[a * n + b] + eps) {
        fail("flow on unused link " + nodes[a].id + "-" + nodes[b].id);
      }
      if (g[a * n + b] && cert.comm[a] != cert.comm[b]) {
        fail("link " + nodes[a].id + "-" + nodes[b].id + " joins unequal comm states");
      }
    }
    double outflow = 0.0;
    for (std::size_t b = 0; b < n; ++b) outflow += cert.flow[a * n + b];
    const double balance = outflow + cert.comm[a];
    const double expected = nodes[a].is_central ? cert.injection[a] : 0.0;
    if (std::abs(balance - expected) > eps) {
      std::ostringstream msg;
      msg << "flow balance at " << nodes[a].id << ": " << balance << " != " << expected;
      fail(msg.str());
    }
  }
  double lhs = 0.0;
  double used = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    if (!nodes[a].is_central) lhs += cert.comm[a];
    for (std::size_t b = 0; b < n; ++b) used += g[a * n + b];
  }
  if (std::abs(lhs - 0.5 * used) > eps) {
    std::ostringstream msg;
    msg << "radial count identity: " << lhs << " comm nodes beyond gateways vs "
        << 0.5 * used << " links";
    fail(msg.str());
  }
  return issues;
}

namespace {

std::vector<std::uint8_t> derive_layer(const std::vector<std::uint8_t>& layer,
                                       std::size_t nodes, std::size_t count,
                                       std::span<const std::uint8_t> node_comm) {
  std::vector<std::uint8_t> out(count, 0);
  for (std::size_t t = 0; t < count; ++t) {
    const std::uint8_t* row = layer.data() + t * nodes;
    for (std::size_t a = 0; a < nodes; ++a) {
      if (row[a] && node_comm[a]) {
        out[t] = 1;
        break;
      }
    }
  }
  return out;
}

}  // namespace

std::vector<std::uint8_t> derive_bus_comm(const CoverageMatrix& cov,
                                          std::span<const std::uint8_t> node_comm) {
  return derive_layer(cov.bus_node, cov.nodes, cov.buses, node_comm);
}

std::vector<std::uint8_t> derive_ev_comm(const CoverageMatrix& cov,
                                         std::span<const std::uint8_t> node_comm) {
  return derive_layer(cov.ev_node, cov.nodes, cov.evs, node_comm);
}

}  // namespace ptin::comm
