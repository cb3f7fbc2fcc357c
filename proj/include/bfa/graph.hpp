#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "bfa/types.hpp"

namespace bfa {

/// One outgoing port: the node it leads to and the port on that node that leads back.
struct PortEntry {
  NodeIndex neighbor = 0;
  Port reciprocal = 0;

  friend bool operator==(const PortEntry&, const PortEntry&) = default;
};

/// Anonymous port-labeled graph. adjacency[v][p] is where port p of node v leads.
///
/// Node indices exist only for the simulator and the oracle; agent programs
/// never see them.
struct PortGraph {
  std::vector<std::vector<PortEntry>> adjacency;

  std::size_t node_count() const { return adjacency.size(); }
  std::size_t edge_count() const;
  std::uint32_t degree(NodeIndex v) const { return static_cast<std::uint32_t>(adjacency[v].size()); }
  std::uint32_t max_degree() const;
  const PortEntry& follow(NodeIndex v, Port p) const { return adjacency[v][p]; }

  /// Builds a graph from an undirected edge list, assigning ports in order of appearance.
  static PortGraph from_edges(std::size_t n, const std::vector<std::pair<NodeIndex, NodeIndex>>& edges);

  friend bool operator==(const PortGraph&, const PortGraph&) = default;
};

enum class Side : std::uint8_t { A = 0, B = 1 };

struct Bipartition {
  std::vector<Side> side;
  std::size_t size_a = 0;
  std::size_t size_b = 0;

  std::size_t min_side() const { return size_a < size_b ? size_a : size_b; }
};

struct GeneratedGraph {
  PortGraph graph;
  Bipartition parts;
};

struct Violation {
  enum class Kind { SelfLoop, ParallelEdge, PortConsistency, PortRange, Disconnected, Empty };
  Kind kind;
  NodeIndex node = 0;
  OptPort port;
  std::string message;
};

std::string to_string(Violation::Kind kind);

// Generators. A-side nodes are numbered 0..a-1, B-side nodes a..a+b-1.
GeneratedGraph make_complete_bipartite(std::uint32_t a, std::uint32_t b);
GeneratedGraph make_random_connected_bipartite(std::uint32_t a, std::uint32_t b, double edge_prob,
                                               std::uint64_t seed);
GeneratedGraph make_path(std::uint32_t k);

// General (not necessarily bipartite) graphs, used by the election tests.
PortGraph make_clique(std::uint32_t k);
PortGraph make_random_connected_graph(std::uint32_t n, double edge_prob, std::uint64_t seed);

std::vector<Violation> validate(const PortGraph& g);

/// Every edge joins opposite sides and the side counts add up.
bool is_proper_bipartition(const PortGraph& g, const Bipartition& parts);

/// Edge-list text format: `n_a n_b m`, then m lines `i j` (A-node i, B-node j).
/// A line may carry two extra columns `i j p q` fixing the port at i and at j.
/// Throws GraphFormatError on malformed input or when validate() reports anything.
GeneratedGraph read_graph(std::istream& in);
GeneratedGraph load_graph_file(const std::string& path);
void write_graph(std::ostream& out, const GeneratedGraph& g);

}  // namespace bfa
