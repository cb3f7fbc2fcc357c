#include "bfa/oracle.hpp"

#include <algorithm>
#include <queue>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bfa {

namespace {

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) throw std::overflow_error("butterfly count overflows 64 bits");
  return out;
}

// Butterflies through u, using caller-provided scratch of size n (left zeroed).
std::uint64_t butterflies_at(const PortGraph& g, NodeIndex u, std::vector<std::uint32_t>& common,
                             std::vector<NodeIndex>& touched) {
  touched.clear();
  for (const PortEntry& e : g.adjacency[u]) {
    for (const PortEntry& f : g.adjacency[e.neighbor]) {
      if (f.neighbor == u) continue;
      if (common[f.neighbor]++ == 0) touched.push_back(f.neighbor);
    }
  }
  std::uint64_t total = 0;
  for (NodeIndex w : touched) {
    total = checked_add(total, choose2(common[w]));
    common[w] = 0;
  }
  return total;
}

std::vector<std::vector<bool>> adjacency_matrix(const PortGraph& g) {
  std::vector<std::vector<bool>> m(g.node_count(), std::vector<bool>(g.node_count(), false));
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    for (const PortEntry& e : g.adjacency[v]) m[v][e.neighbor] = true;
  }
  return m;
}

std::vector<std::uint32_t> bfs_distances(const std::vector<std::vector<NodeIndex>>& adj, NodeIndex from) {
  std::vector<std::uint32_t> dist(adj.size(), UINT32_MAX);
  std::queue<NodeIndex> q;
  dist[from] = 0;
  q.push(from);
  while (!q.empty()) {
    const NodeIndex v = q.front();
    q.pop();
    for (NodeIndex w : adj[v]) {
      if (dist[w] == UINT32_MAX) {
        dist[w] = dist[v] + 1;
        q.push(w);
      }
    }
  }
  return dist;
}

}  // namespace

std::uint64_t choose2(std::uint64_t k) {
  if (k < 2) return 0;
  const std::uint64_t a = k % 2 == 0 ? k / 2 : k;
  const std::uint64_t b = k % 2 == 0 ? k - 1 : (k - 1) / 2;
  std::uint64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) throw std::overflow_error("C(k, 2) overflows 64 bits");
  return out;
}

std::vector<Side> oracle_coloring(const PortGraph& g) {
  const std::size_t n = g.node_count();
  std::vector<int> color(n, -1);
  if (n == 0) return {};
  std::queue<NodeIndex> q;
  color[0] = 0;
  q.push(0);
  while (!q.empty()) {
    const NodeIndex v = q.front();
    q.pop();
    for (const PortEntry& e : g.adjacency[v]) {
      if (color[e.neighbor] < 0) {
        color[e.neighbor] = 1 - color[v];
        q.push(e.neighbor);
      } else if (color[e.neighbor] == color[v]) {
        throw NotBipartite("odd cycle through edge " + std::to_string(v) + "-" + std::to_string(e.neighbor));
      }
    }
  }
  std::vector<Side> out(n);
  for (NodeIndex v = 0; v < n; ++v) {
    if (color[v] < 0) throw std::invalid_argument("oracle coloring needs a connected graph");
    out[v] = color[v] == 0 ? Side::A : Side::B;
  }
  return out;
}

std::vector<std::uint64_t> oracle_per_node_butterflies_serial(const PortGraph& g, const std::vector<Side>& coloring) {
  (void)coloring;  // two-hop neighbors of u are on u's side already
  const std::size_t n = g.node_count();
  std::vector<std::uint64_t> out(n, 0);
  std::vector<std::uint32_t> common(n, 0);
  std::vector<NodeIndex> touched;
  for (NodeIndex u = 0; u < n; ++u) out[u] = butterflies_at(g, u, common, touched);
  return out;
}

std::vector<std::uint64_t> oracle_per_node_butterflies(const PortGraph& g, const std::vector<Side>& coloring) {
  (void)coloring;
  const std::size_t n = g.node_count();
  std::vector<std::uint64_t> out(n, 0);
  std::exception_ptr failure;
#pragma omp parallel
  {
    std::vector<std::uint32_t> common(n, 0);
    std::vector<NodeIndex> touched;
#pragma omp for schedule(dynamic, 16)
    for (std::int64_t u = 0; u < static_cast<std::int64_t>(n); ++u) {
      try {
        out[u] = butterflies_at(g, static_cast<NodeIndex>(u), common, touched);
      } catch (...) {
#pragma omp critical(bfa_oracle_failure)
        if (!failure) failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::uint64_t enumerate_butterflies(const PortGraph& g, const std::vector<Side>& coloring) {
  const auto m = adjacency_matrix(g);
  std::vector<NodeIndex> a, b;
  for (NodeIndex v = 0; v < g.node_count(); ++v) (coloring[v] == Side::A ? a : b).push_back(v);
  std::uint64_t count = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      for (std::size_t k = 0; k < b.size(); ++k) {
        if (!m[a[i]][b[k]] || !m[a[j]][b[k]]) continue;
        for (std::size_t l = k + 1; l < b.size(); ++l) {
          if (m[a[i]][b[l]] && m[a[j]][b[l]]) ++count;
        }
      }
    }
  }
  return count;
}

std::uint64_t oracle_total_butterflies(const PortGraph& g, const std::vector<Side>& coloring) {
  const auto per_node = oracle_per_node_butterflies(g, coloring);
  std::uint64_t sum_a = 0, sum_b = 0;
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    (coloring[v] == Side::A ? sum_a : sum_b) = checked_add(coloring[v] == Side::A ? sum_a : sum_b, per_node[v]);
  }
  if (sum_a != sum_b || sum_a % 2 != 0) {
    throw std::logic_error("oracle: side sums disagree (" + std::to_string(sum_a) + " vs " + std::to_string(sum_b) + ")");
  }
  const std::uint64_t total = sum_a / 2;
  if (g.node_count() <= 64) {
    const std::uint64_t direct = enumerate_butterflies(g, coloring);
    if (direct != total) {
      throw std::logic_error("oracle: pairwise total " + std::to_string(total) + " != enumeration " +
                             std::to_string(direct));
    }
  }
  return total;
}

TreeReport check_spanning_tree(const PortGraph& g, const TreeEdgeSet& tree, NodeIndex root) {
  TreeReport report;
  const std::size_t n = g.node_count();
  if (tree.size() != n) {
    report.problem = "tree size differs from node count";
    return report;
  }
  if (root >= n || tree.parent[root]) {
    report.problem = "root has a parent";
    return report;
  }
  std::vector<std::vector<NodeIndex>> adj(n);
  std::size_t edges = 0;
  for (NodeIndex v = 0; v < n; ++v) {
    if (!tree.parent[v]) {
      if (v != root) {
        report.problem = "node " + std::to_string(v) + " has no parent but is not the root";
        return report;
      }
      continue;
    }
    if (*tree.parent[v] >= g.degree(v)) {
      report.problem = "node " + std::to_string(v) + " parent port is not an edge";
      return report;
    }
    const NodeIndex u = g.follow(v, *tree.parent[v]).neighbor;
    adj[v].push_back(u);
    adj[u].push_back(v);
    ++edges;
  }
  if (edges + 1 != n) {
    report.problem = "tree has " + std::to_string(edges) + " edges";
    return report;
  }
  const auto from_root = bfs_distances(adj, root);
  for (NodeIndex v = 0; v < n; ++v) {
    if (from_root[v] == UINT32_MAX) {
      report.problem = "node " + std::to_string(v) + " is not connected to the root";
      return report;
    }
  }
  report.is_spanning_tree = true;
  report.depth = *std::max_element(from_root.begin(), from_root.end());
  const auto far = static_cast<NodeIndex>(std::max_element(from_root.begin(), from_root.end()) - from_root.begin());
  const auto from_far = bfs_distances(adj, far);
  report.diameter = *std::max_element(from_far.begin(), from_far.end());
  return report;
}

OracleResult run_oracle(const PortGraph& g) {
  OracleResult r;
  r.coloring = oracle_coloring(g);
  r.per_node_butterflies = oracle_per_node_butterflies(g, r.coloring);
  r.total_butterflies = oracle_total_butterflies(g, r.coloring);
  return r;
}

}  // namespace bfa
