#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bfa/graph.hpp"
#include "bfa/tree.hpp"

namespace bfa {

// Centralized ground truth. Everything here sees the whole graph.

/// Breadth-first 2-coloring from node 0 (node 0 gets Side::A). Throws NotBipartite.
std::vector<Side> oracle_coloring(const PortGraph& g);

/// B(u) = sum over same-side w != u of C(|N(u) & N(w)|, 2), by two-hop counting.
/// The OpenMP kernel; oracle_per_node_butterflies_serial is the reference it is tested against.
std::vector<std::uint64_t> oracle_per_node_butterflies(const PortGraph& g, const std::vector<Side>& coloring);
std::vector<std::uint64_t> oracle_per_node_butterflies_serial(const PortGraph& g, const std::vector<Side>& coloring);

/// Half the A-side sum; asserts it equals half the B-side sum and, for graphs
/// with at most 64 nodes, the quadruple enumeration. Throws std::logic_error on disagreement.
std::uint64_t oracle_total_butterflies(const PortGraph& g, const std::vector<Side>& coloring);

/// Counts butterflies by checking every (A-pair, B-pair) for all four edges.
std::uint64_t enumerate_butterflies(const PortGraph& g, const std::vector<Side>& coloring);

/// C(k, 2) with overflow checking.
std::uint64_t choose2(std::uint64_t k);

struct TreeReport {
  bool is_spanning_tree = false;
  std::uint32_t depth = 0;
  std::uint32_t diameter = 0;
  std::string problem;  // first violation found, empty when valid
};

TreeReport check_spanning_tree(const PortGraph& g, const TreeEdgeSet& tree, NodeIndex root);

struct OracleResult {
  std::vector<Side> coloring;
  std::vector<std::uint64_t> per_node_butterflies;
  std::uint64_t total_butterflies = 0;
};

OracleResult run_oracle(const PortGraph& g);

}  // namespace bfa
