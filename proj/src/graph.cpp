#include "bfa/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>

#include "bfa/rng.hpp"

namespace bfa {

namespace {

struct DisjointSets {
  std::vector<std::uint32_t> parent;

  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }

  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }

  bool unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

Bipartition bipartition_of(std::uint32_t a, std::uint32_t b) {
  Bipartition parts;
  parts.side.assign(a, Side::A);
  parts.side.insert(parts.side.end(), b, Side::B);
  parts.size_a = a;
  parts.size_b = b;
  return parts;
}

// Per-node neighbor lists, each shuffled, then stitched into consistent ports.
PortGraph with_shuffled_ports(std::size_t n, const std::vector<std::pair<NodeIndex, NodeIndex>>& edges,
                              Rng& rng) {
  std::vector<std::vector<NodeIndex>> nbrs(n);
  for (auto [u, v] : edges) {
    nbrs[u].push_back(v);
    nbrs[v].push_back(u);
  }
  for (auto& list : nbrs) rng.shuffle(list);

  PortGraph g;
  g.adjacency.resize(n);
  std::vector<std::map<NodeIndex, Port>> port_of(n);
  for (NodeIndex v = 0; v < n; ++v) {
    for (Port p = 0; p < nbrs[v].size(); ++p) port_of[v][nbrs[v][p]] = p;
  }
  for (NodeIndex v = 0; v < n; ++v) {
    for (NodeIndex w : nbrs[v]) g.adjacency[v].push_back({w, port_of[w].at(v)});
  }
  return g;
}

}  // namespace

std::size_t PortGraph::edge_count() const {
  std::size_t total = 0;
  for (const auto& ports : adjacency) total += ports.size();
  return total / 2;
}

std::uint32_t PortGraph::max_degree() const {
  std::uint32_t best = 0;
  for (const auto& ports : adjacency) best = std::max<std::uint32_t>(best, static_cast<std::uint32_t>(ports.size()));
  return best;
}

PortGraph PortGraph::from_edges(std::size_t n, const std::vector<std::pair<NodeIndex, NodeIndex>>& edges) {
  PortGraph g;
  g.adjacency.resize(n);
  for (auto [u, v] : edges) {
    const auto pu = static_cast<Port>(g.adjacency[u].size());
    const auto pv = static_cast<Port>(g.adjacency[v].size()) + (u == v ? 1u : 0u);
    g.adjacency[u].push_back({v, pv});
    g.adjacency[v].push_back({u, pu});
  }
  return g;
}

std::string to_string(Violation::Kind kind) {
  switch (kind) {
    case Violation::Kind::SelfLoop: return "self-loop";
    case Violation::Kind::ParallelEdge: return "parallel-edge";
    case Violation::Kind::PortConsistency: return "port-consistency";
    case Violation::Kind::PortRange: return "port-range";
    case Violation::Kind::Disconnected: return "disconnected";
    case Violation::Kind::Empty: return "empty";
  }
  return "unknown";
}

GeneratedGraph make_complete_bipartite(std::uint32_t a, std::uint32_t b) {
  if (a == 0 || b == 0) throw std::invalid_argument("complete bipartite graph needs a >= 1 and b >= 1");
  GeneratedGraph out;
  out.parts = bipartition_of(a, b);
  out.graph.adjacency.resize(std::size_t{a} + b);
  for (NodeIndex i = 0; i < a; ++i) {
    for (NodeIndex j = 0; j < b; ++j) out.graph.adjacency[i].push_back({a + j, i});
  }
  for (NodeIndex j = 0; j < b; ++j) {
    for (NodeIndex i = 0; i < a; ++i) out.graph.adjacency[a + j].push_back({i, j});
  }
  return out;
}

GeneratedGraph make_random_connected_bipartite(std::uint32_t a, std::uint32_t b, double edge_prob,
                                               std::uint64_t seed) {
  if (a == 0 || b == 0) throw std::invalid_argument("random bipartite graph needs a >= 1 and b >= 1");
  if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) throw std::invalid_argument("edge probability must lie in [0, 1]");

  Rng rng(seed);
  const std::size_t n = std::size_t{a} + b;
  std::vector<std::pair<NodeIndex, NodeIndex>> edges;
  DisjointSets components(n);
  for (NodeIndex i = 0; i < a; ++i) {
    for (NodeIndex j = 0; j < b; ++j) {
      if (rng.unit() < edge_prob) {
        edges.emplace_back(i, a + j);
        components.unite(i, a + j);
      }
    }
  }

  // Join components with the smallest cross pairs under a seeded node ranking.
  std::vector<std::uint32_t> rank(n);
  std::iota(rank.begin(), rank.end(), 0u);
  rng.shuffle(rank);
  std::vector<std::pair<NodeIndex, NodeIndex>> order;
  order.reserve(std::size_t{a} * b);
  for (NodeIndex i = 0; i < a; ++i) {
    for (NodeIndex j = 0; j < b; ++j) order.emplace_back(i, a + j);
  }
  std::sort(order.begin(), order.end(), [&](const auto& x, const auto& y) {
    return std::pair(rank[x.first], rank[x.second]) < std::pair(rank[y.first], rank[y.second]);
  });
  for (auto [i, j] : order) {
    if (components.unite(i, j)) edges.emplace_back(i, j);
  }

  GeneratedGraph out;
  out.parts = bipartition_of(a, b);
  out.graph = with_shuffled_ports(n, edges, rng);
  return out;
}

GeneratedGraph make_path(std::uint32_t k) {
  if (k < 2) throw std::invalid_argument("path needs at least 2 nodes");
  std::vector<std::pair<NodeIndex, NodeIndex>> edges;
  for (NodeIndex v = 0; v + 1 < k; ++v) edges.emplace_back(v, v + 1);
  GeneratedGraph out;
  out.graph = PortGraph::from_edges(k, edges);
  out.parts.side.resize(k);
  for (NodeIndex v = 0; v < k; ++v) {
    out.parts.side[v] = v % 2 == 0 ? Side::A : Side::B;
    (v % 2 == 0 ? out.parts.size_a : out.parts.size_b) += 1;
  }
  return out;
}

PortGraph make_clique(std::uint32_t k) {
  if (k < 2) throw std::invalid_argument("clique needs at least 2 nodes");
  std::vector<std::pair<NodeIndex, NodeIndex>> edges;
  for (NodeIndex u = 0; u < k; ++u) {
    for (NodeIndex v = u + 1; v < k; ++v) edges.emplace_back(u, v);
  }
  return PortGraph::from_edges(k, edges);
}

PortGraph make_random_connected_graph(std::uint32_t n, double edge_prob, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("random graph needs at least 2 nodes");
  if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) throw std::invalid_argument("edge probability must lie in [0, 1]");
  Rng rng(seed);
  std::vector<std::pair<NodeIndex, NodeIndex>> edges;
  DisjointSets components(n);
  for (NodeIndex u = 0; u < n; ++u) {
    for (NodeIndex v = u + 1; v < n; ++v) {
      if (rng.unit() < edge_prob) {
        edges.emplace_back(u, v);
        components.unite(u, v);
      }
    }
  }
  std::vector<std::uint32_t> rank(n);
  std::iota(rank.begin(), rank.end(), 0u);
  rng.shuffle(rank);
  std::vector<NodeIndex> by_rank(n);
  for (NodeIndex v = 0; v < n; ++v) by_rank[rank[v]] = v;
  for (std::uint32_t r = 1; r < n; ++r) {
    if (components.unite(by_rank[0], by_rank[r])) edges.emplace_back(by_rank[0], by_rank[r]);
  }
  return with_shuffled_ports(n, edges, rng);
}

std::vector<Violation> validate(const PortGraph& g) {
  std::vector<Violation> out;
  const std::size_t n = g.node_count();
  if (n == 0) {
    out.push_back({Violation::Kind::Empty, 0, std::nullopt, "graph has no nodes"});
    return out;
  }
  for (NodeIndex v = 0; v < n; ++v) {
    std::set<NodeIndex> seen;
    for (Port p = 0; p < g.adjacency[v].size(); ++p) {
      const PortEntry& e = g.adjacency[v][p];
      if (e.neighbor >= n) {
        out.push_back({Violation::Kind::PortRange, v, p,
                       "node " + std::to_string(v) + " port " + std::to_string(p) + " leads to missing node " +
                           std::to_string(e.neighbor)});
        continue;
      }
      if (e.neighbor == v) {
        out.push_back({Violation::Kind::SelfLoop, v, p,
                       "node " + std::to_string(v) + " port " + std::to_string(p) + " is a self-loop"});
      }
      if (!seen.insert(e.neighbor).second) {
        out.push_back({Violation::Kind::ParallelEdge, v, p,
                       "node " + std::to_string(v) + " port " + std::to_string(p) + " duplicates an edge to node " +
                           std::to_string(e.neighbor)});
      }
      const auto& back = g.adjacency[e.neighbor];
      if (e.reciprocal >= back.size()) {
        out.push_back({Violation::Kind::PortRange, v, p,
                       "node " + std::to_string(v) + " port " + std::to_string(p) + " names reciprocal port " +
                           std::to_string(e.reciprocal) + " but node " + std::to_string(e.neighbor) + " has degree " +
                           std::to_string(back.size())});
      } else if (back[e.reciprocal].neighbor != v || back[e.reciprocal].reciprocal != p) {
        out.push_back({Violation::Kind::PortConsistency, v, p,
                       "node " + std::to_string(v) + " port " + std::to_string(p) + " leads to (" +
                           std::to_string(e.neighbor) + ", " + std::to_string(e.reciprocal) +
                           ") which does not lead back"});
      }
    }
  }

  std::vector<bool> reached(n, false);
  std::queue<NodeIndex> frontier;
  reached[0] = true;
  frontier.push(0);
  std::size_t count = 1;
  while (!frontier.empty()) {
    const NodeIndex v = frontier.front();
    frontier.pop();
    for (const PortEntry& e : g.adjacency[v]) {
      if (e.neighbor < n && !reached[e.neighbor]) {
        reached[e.neighbor] = true;
        ++count;
        frontier.push(e.neighbor);
      }
    }
  }
  if (count != n) {
    const auto first = static_cast<NodeIndex>(std::find(reached.begin(), reached.end(), false) - reached.begin());
    out.push_back({Violation::Kind::Disconnected, first, std::nullopt,
                   "node " + std::to_string(first) + " is not reachable from node 0 (" + std::to_string(n - count) +
                       " unreachable)"});
  }
  return out;
}

bool is_proper_bipartition(const PortGraph& g, const Bipartition& parts) {
  if (parts.side.size() != g.node_count()) return false;
  const auto a = static_cast<std::size_t>(std::count(parts.side.begin(), parts.side.end(), Side::A));
  if (a != parts.size_a || g.node_count() - a != parts.size_b) return false;
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    for (const PortEntry& e : g.adjacency[v]) {
      if (parts.side[v] == parts.side[e.neighbor]) return false;
    }
  }
  return true;
}

GeneratedGraph read_graph(std::istream& in) {
  std::string line;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") != std::string::npos && line[0] != '#') return true;
    }
    return false;
  };
  if (!next_line()) throw GraphFormatError("graph file is empty");
  std::uint64_t na = 0, nb = 0, m = 0;
  {
    std::istringstream header(line);
    if (!(header >> na >> nb >> m)) throw GraphFormatError("header must be `n_a n_b m`, got: " + line);
  }
  if (na == 0 || nb == 0) throw GraphFormatError("both sides must be non-empty");
  const std::size_t n = na + nb;

  struct Row {
    NodeIndex a, b;
    std::optional<Port> pa, pb;
  };
  std::vector<Row> rows;
  for (std::uint64_t k = 0; k < m; ++k) {
    if (!next_line()) throw GraphFormatError("expected " + std::to_string(m) + " edges, found " + std::to_string(k));
    std::istringstream fields(line);
    std::uint64_t i = 0, j = 0;
    if (!(fields >> i >> j)) throw GraphFormatError("malformed edge line: " + line);
    if (i >= na || j >= nb) throw GraphFormatError("edge index out of range: " + line);
    Row row{static_cast<NodeIndex>(i), static_cast<NodeIndex>(na + j), std::nullopt, std::nullopt};
    std::uint64_t pa = 0, pb = 0;
    if (fields >> pa) {
      if (!(fields >> pb)) throw GraphFormatError("explicit ports need both columns: " + line);
      row.pa = static_cast<Port>(pa);
      row.pb = static_cast<Port>(pb);
    }
    rows.push_back(row);
  }

  const bool explicit_ports = !rows.empty() && rows.front().pa.has_value();
  for (const Row& r : rows) {
    if (r.pa.has_value() != explicit_ports) throw GraphFormatError("mixing implicit and explicit ports");
  }

  GeneratedGraph out;
  out.parts = bipartition_of(static_cast<std::uint32_t>(na), static_cast<std::uint32_t>(nb));
  if (!explicit_ports) {
    std::vector<std::pair<NodeIndex, NodeIndex>> edges;
    for (const Row& r : rows) edges.emplace_back(r.a, r.b);
    out.graph = PortGraph::from_edges(n, edges);
  } else {
    std::vector<std::uint32_t> degree(n, 0);
    for (const Row& r : rows) {
      ++degree[r.a];
      ++degree[r.b];
    }
    // Ports outside [0, degree) are clamped into a sentinel slot so validate() can report them.
    std::vector<std::map<Port, PortEntry>> slots(n);
    std::vector<std::string> problems;
    for (const Row& r : rows) {
      if (!slots[r.a].emplace(*r.pa, PortEntry{r.b, *r.pb}).second)
        problems.push_back("node " + std::to_string(r.a) + " port " + std::to_string(*r.pa) + " assigned twice");
      if (!slots[r.b].emplace(*r.pb, PortEntry{r.a, *r.pa}).second)
        problems.push_back("node " + std::to_string(r.b) + " port " + std::to_string(*r.pb) + " assigned twice");
    }
    out.graph.adjacency.resize(n);
    for (NodeIndex v = 0; v < n; ++v) {
      for (auto& [port, entry] : slots[v]) {
        if (port != out.graph.adjacency[v].size()) {
          problems.push_back("node " + std::to_string(v) + " ports are not exactly 0.." +
                             std::to_string(degree[v] == 0 ? 0 : degree[v] - 1));
          break;
        }
        out.graph.adjacency[v].push_back(entry);
      }
    }
    if (!problems.empty()) throw GraphFormatError("invalid graph: " + problems.front());
  }

  const auto violations = validate(out.graph);
  if (!violations.empty()) {
    throw GraphFormatError("invalid graph: " + to_string(violations.front().kind) + ": " +
                           violations.front().message);
  }
  return out;
}

GeneratedGraph load_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GraphFormatError("cannot open graph file: " + path);
  return read_graph(in);
}

void write_graph(std::ostream& out, const GeneratedGraph& g) {
  std::vector<NodeIndex> index_in_side(g.graph.node_count());
  std::size_t na = 0, nb = 0;
  for (NodeIndex v = 0; v < g.graph.node_count(); ++v) {
    index_in_side[v] = static_cast<NodeIndex>(g.parts.side[v] == Side::A ? na++ : nb++);
  }
  out << na << ' ' << nb << ' ' << g.graph.edge_count() << '\n';
  for (NodeIndex v = 0; v < g.graph.node_count(); ++v) {
    if (g.parts.side[v] != Side::A) continue;
    for (Port p = 0; p < g.graph.degree(v); ++p) {
      const PortEntry& e = g.graph.adjacency[v][p];
      out << index_in_side[v] << ' ' << index_in_side[e.neighbor] << ' ' << p << ' ' << e.reciprocal << '\n';
    }
  }
}

}  // namespace bfa
