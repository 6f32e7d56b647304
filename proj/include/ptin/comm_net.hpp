#pragma once

// Communication coverage geometry, radial connectivity of CN nodes to the
// central gateways, and the derived comm states of PDN buses and EVs.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ptin/model.hpp"

namespace ptin::comm {

// Pairwise coverage flags. Row-major:
//   node_node[a * nodes + b], bus_node[i * nodes + a], ev_node[z * nodes + a].
struct CoverageMatrix {
  std::size_t nodes = 0;
  std::size_t buses = 0;
  std::size_t evs = 0;
  std::vector<std::uint8_t> node_node;
  std::vector<std::uint8_t> bus_node;
  std::vector<std::uint8_t> ev_node;

  bool link(std::size_t a, std::size_t b) const { return node_node[a * nodes + b] != 0; }
  bool covers_bus(std::size_t a, std::size_t bus) const { return bus_node[bus * nodes + a] != 0; }
  bool covers_ev(std::size_t a, std::size_t ev) const { return ev_node[ev * nodes + a] != 0; }
};

// Node pairs use the larger of the two ranges; buses and EVs use the node's.
// A node is never linked to itself.
CoverageMatrix coverage_pairs(std::span<const CnNode> nodes, std::span<const Point> buses,
                              std::span<const Point> evs);

// Solution of the radial CN topology: comm flags, the links in use (each as
// parent -> child of a forest rooted at central nodes), commodity flows and
// central injections.
struct Connectivity {
  std::vector<std::uint8_t> comm;
  std::vector<std::pair<std::size_t, std::size_t>> links;
  std::vector<double> flow;          // flow[a * n + b], antisymmetric
  std::vector<double> injection;     // nonzero only on central nodes
  double big_m = 0.0;

  bool uses(std::size_t a, std::size_t b) const;
};

Connectivity solve_connectivity(std::span<const CnNode> nodes, const CoverageMatrix& cov);

// Re-checks the commodity-flow system on a certificate and returns one line
// per violated constraint (empty when valid).
std::vector<std::string> validate_certificate(std::span<const CnNode> nodes,
                                              const CoverageMatrix& cov,
                                              const Connectivity& cert);

// c_i = 1 iff some comm-normal node covers bus i.
std::vector<std::uint8_t> derive_bus_comm(const CoverageMatrix& cov,
                                          std::span<const std::uint8_t> node_comm);

// Same covered-by-comm-normal-node rule for EVs.
std::vector<std::uint8_t> derive_ev_comm(const CoverageMatrix& cov,
                                         std::span<const std::uint8_t> node_comm);

}  // namespace ptin::comm
