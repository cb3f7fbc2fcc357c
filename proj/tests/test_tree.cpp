#include <numeric>
#include <queue>

#include "doctest.h"

#include "bfa/oracle.hpp"
#include "bfa/tree.hpp"

using namespace bfa;

namespace {

// BFS tree from root, written as parent ports.
TreeEdgeSet bfs_tree(const PortGraph& g, NodeIndex root) {
  TreeEdgeSet t;
  t.parent.assign(g.node_count(), std::nullopt);
  std::vector<bool> seen(g.node_count(), false);
  std::queue<NodeIndex> q;
  seen[root] = true;
  q.push(root);
  while (!q.empty()) {
    const NodeIndex v = q.front();
    q.pop();
    for (const auto& e : g.adjacency[v]) {
      if (seen[e.neighbor]) continue;
      seen[e.neighbor] = true;
      t.parent[e.neighbor] = e.reciprocal;
      q.push(e.neighbor);
    }
  }
  return t;
}

std::vector<AgentId> iota_ids(std::size_t n) {
  std::vector<AgentId> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

}  // namespace

TEST_CASE("tree structure helpers") {
  const auto g = make_path(4).graph;  // 0-1-2-3
  const auto t = bfs_tree(g, 0);
  CHECK(t.root() == 0);
  CHECK(t.edge_count() == 3);
  CHECK(node_depths(g, t) == std::vector<std::uint32_t>{0, 1, 2, 3});
  CHECK(tree_depth(g, t) == 3);
  const auto kids = child_ports(g, t);
  CHECK(kids[0].size() == 1);
  CHECK(kids[3].empty());

  TreeEdgeSet two_roots = t;
  two_roots.parent[2].reset();
  CHECK_THROWS_AS(two_roots.root(), InvalidTree);
  CHECK_THROWS_AS(require_valid_tree(g, two_roots), InvalidTree);

  // 1 and 2 point at each other
  TreeEdgeSet cycle = t;
  for (Port p = 0; p < g.degree(1); ++p) {
    if (g.follow(1, p).neighbor == 2) cycle.parent[1] = p;
  }
  CHECK_THROWS_AS(require_valid_tree(g, cycle), InvalidTree);

  TreeEdgeSet bad_port = t;
  bad_port.parent[3] = Port{4};
  CHECK_THROWS_AS(require_valid_tree(g, bad_port), InvalidTree);
}

TEST_CASE("aggregate payload words") {
  const auto a = AggregatePayload::own(3, PartitionBit::Zero);
  const auto b = AggregatePayload::own(5, PartitionBit::One);
  auto acc = a.to_words();
  combine_aggregate(acc, b.to_words());
  const auto merged = AggregatePayload::from_words(acc);
  CHECK(merged.degree_sum == 8);
  CHECK(merged.count0 == 1);
  CHECK(merged.count1 == 1);
  CHECK(merged.max_degree == 5);

  std::vector<std::uint64_t> sum{1, 2};
  combine_sum(sum, {10, 20, 30});
  CHECK(sum == std::vector<std::uint64_t>{11, 22, 30});
}

TEST_CASE("convergecast and broadcast on a star take one wave") {
  const auto g = make_complete_bipartite(1, 6).graph;
  const auto c = place_dispersed(g, iota_ids(7));
  const auto t = bfs_tree(g, 0);
  std::vector<std::vector<std::uint64_t>> values;
  for (std::uint64_t k = 0; k < 7; ++k) values.push_back({k + 1});
  const auto up = convergecast(g, c, t, values, combine_sum);
  CHECK(up.rounds == 2);
  CHECK(up.root_value == std::vector<std::uint64_t>{28});
  const auto down = broadcast_down(g, c, t, {42});
  CHECK(down.rounds == 2);
  for (const auto& v : down.values) CHECK(v == std::vector<std::uint64_t>{42});
}

TEST_CASE("path tree of depth d takes 2d rounds each way") {
  for (std::uint32_t k = 2; k <= 9; ++k) {
    const auto g = make_path(k).graph;
    const auto c = place_dispersed(g, iota_ids(k));
    const auto t = bfs_tree(g, 0);
    std::vector<std::vector<std::uint64_t>> values(k, std::vector<std::uint64_t>{1});
    const auto up = convergecast(g, c, t, values, combine_sum);
    CHECK(up.rounds == 2 * (k - 1));
    CHECK(up.root_value[0] == k);
    const auto down = broadcast_down(g, c, t, {7});
    CHECK(down.rounds == 2 * (k - 1));
  }
}

TEST_CASE("convergecast sums and broadcast reaches everyone on random graphs") {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    const auto gg = make_random_connected_bipartite(5 + seed, 3 + 2 * seed, 0.15, seed);
    const auto& g = gg.graph;
    const auto c = place_dispersed(g, iota_ids(g.node_count()));
    const NodeIndex root = static_cast<NodeIndex>(seed % g.node_count());
    const auto t = bfs_tree(g, root);
    const auto report = check_spanning_tree(g, t, root);
    REQUIRE(report.is_spanning_tree);

    std::vector<std::vector<std::uint64_t>> values;
    std::uint64_t expected = 0;
    for (std::uint64_t k = 0; k < g.node_count(); ++k) {
      values.push_back({k * k + seed});
      expected += k * k + seed;
    }
    const auto up = convergecast(g, c, t, values, combine_sum);
    CHECK(up.root_value[0] == expected);
    CHECK(up.rounds == 2 * report.depth);
    CHECK(up.rounds <= 4 * gg.parts.min_side());

    const auto down = broadcast_down(g, c, t, {seed, 99});
    CHECK(down.rounds == 2 * report.depth);
    for (const auto& v : down.values) CHECK(v == std::vector<std::uint64_t>{seed, 99});
  }
}

TEST_CASE("tree protocols reject invalid trees") {
  const auto g = make_path(3).graph;
  const auto c = place_dispersed(g, iota_ids(3));
  TreeEdgeSet none;
  none.parent.assign(3, std::nullopt);
  CHECK_THROWS_AS(convergecast(g, c, none, {{1}, {1}, {1}}, combine_sum), InvalidTree);
  CHECK_THROWS_AS(broadcast_down(g, c, none, {1}), InvalidTree);
}
