#include "bfa/tree.hpp"

#include <algorithm>

namespace bfa {

std::size_t TreeEdgeSet::edge_count() const {
  return static_cast<std::size_t>(std::count_if(parent.begin(), parent.end(), [](const OptPort& p) { return p.has_value(); }));
}

NodeIndex TreeEdgeSet::root() const {
  std::optional<NodeIndex> found;
  for (NodeIndex v = 0; v < parent.size(); ++v) {
    if (parent[v]) continue;
    if (found) throw InvalidTree("tree has more than one root");
    found = v;
  }
  if (!found) throw InvalidTree("tree has no root");
  return *found;
}

void require_valid_tree(const PortGraph& g, const TreeEdgeSet& tree) {
  const std::size_t n = g.node_count();
  if (tree.size() != n) throw InvalidTree("tree covers " + std::to_string(tree.size()) + " of " + std::to_string(n) + " nodes");
  const NodeIndex root = tree.root();
  for (NodeIndex v = 0; v < n; ++v) {
    if (tree.parent[v] && *tree.parent[v] >= g.degree(v)) {
      throw InvalidTree("node " + std::to_string(v) + " parent port " + std::to_string(*tree.parent[v]) +
                        " does not exist");
    }
  }
  // 0 = unvisited, 1 = on the current walk, 2 = known to reach the root
  std::vector<std::uint8_t> mark(n, 0);
  mark[root] = 2;
  std::vector<NodeIndex> walk;
  for (NodeIndex start = 0; start < n; ++start) {
    walk.clear();
    NodeIndex v = start;
    while (mark[v] == 0) {
      mark[v] = 1;
      walk.push_back(v);
      v = g.follow(v, *tree.parent[v]).neighbor;
    }
    if (mark[v] == 1) throw InvalidTree("parent pointers form a cycle through node " + std::to_string(v));
    for (NodeIndex w : walk) mark[w] = 2;
  }
}

std::vector<std::vector<Port>> child_ports(const PortGraph& g, const TreeEdgeSet& tree) {
  std::vector<std::vector<Port>> out(g.node_count());
  for (NodeIndex v = 0; v < tree.size(); ++v) {
    if (!tree.parent[v]) continue;
    const PortEntry& up = g.follow(v, *tree.parent[v]);
    out[up.neighbor].push_back(up.reciprocal);
  }
  for (auto& ports : out) std::sort(ports.begin(), ports.end());
  return out;
}

std::vector<std::uint32_t> node_depths(const PortGraph& g, const TreeEdgeSet& tree) {
  require_valid_tree(g, tree);
  const std::size_t n = g.node_count();
  std::vector<std::int64_t> depth(n, -1);
  depth[tree.root()] = 0;
  std::vector<NodeIndex> walk;
  for (NodeIndex start = 0; start < n; ++start) {
    walk.clear();
    NodeIndex v = start;
    while (depth[v] < 0) {
      walk.push_back(v);
      v = g.follow(v, *tree.parent[v]).neighbor;
    }
    for (auto it = walk.rbegin(); it != walk.rend(); ++it) {
      depth[*it] = depth[v] + 1;
      v = *it;
    }
  }
  return {depth.begin(), depth.end()};
}

std::uint32_t tree_depth(const PortGraph& g, const TreeEdgeSet& tree) {
  const auto d = node_depths(g, tree);
  return d.empty() ? 0 : *std::max_element(d.begin(), d.end());
}

TreeEdgeSet tree_from_agents(const std::vector<AgentState>& agents) {
  TreeEdgeSet tree;
  for (const auto& s : agents) tree.parent.push_back(s.parent);
  return tree;
}

AggregatePayload AggregatePayload::from_words(const std::vector<std::uint64_t>& words, bool completion) {
  AggregatePayload p;
  if (words.size() >= 4) {
    p.degree_sum = words[0];
    p.count0 = words[1];
    p.count1 = words[2];
    p.max_degree = words[3];
  }
  p.completion = completion;
  return p;
}

AggregatePayload AggregatePayload::own(std::uint32_t degree, PartitionBit partition) {
  AggregatePayload p;
  p.degree_sum = degree;
  p.count0 = partition == PartitionBit::Zero ? 1 : 0;
  p.count1 = partition == PartitionBit::One ? 1 : 0;
  p.max_degree = degree;
  return p;
}

void combine_sum(std::vector<std::uint64_t>& acc, const std::vector<std::uint64_t>& child) {
  if (acc.size() < child.size()) acc.resize(child.size(), 0);
  for (std::size_t i = 0; i < child.size(); ++i) acc[i] += child[i];
}

void combine_aggregate(std::vector<std::uint64_t>& acc, const std::vector<std::uint64_t>& child) {
  if (acc.size() < child.size()) acc.resize(child.size(), 0);
  for (std::size_t i = 0; i < child.size(); ++i) {
    acc[i] = i + 1 == child.size() ? std::max(acc[i], child[i]) : acc[i] + child[i];
  }
}

StepResult ConvergecastProgram::step(const AgentState& self, Peers peers, const StepContext& ctx) const {
  StepResult out{self, std::nullopt};
  AgentState& s = out.next;
  const bool outbound = ctx.round % 2 == 1;
  if (outbound) {
    if (s.parent && !s.scratch.delivered && s.scratch.reported == s.scratch.child_count) {
      s.excursion = s.parent;
      out.move = s.parent;
    }
    return out;
  }
  if (!s.at_home()) {
    for (const AgentState* peer : peers) {
      if (peer->at_home()) s.scratch.delivered = true;
    }
    out.move = s.arrival_port;
    s.excursion.reset();
    return out;
  }
  for (const AgentState* peer : peers) {
    if (!peer->at_home() && !peer->scratch.delivered) {
      rule_(s.scratch.payload, peer->scratch.payload);
      ++s.scratch.reported;
    }
  }
  return out;
}

bool ConvergecastProgram::local_done(const AgentState& self) const {
  if (!self.parent) return self.scratch.reported == self.scratch.child_count;
  return self.scratch.delivered && self.at_home();
}

StepResult BroadcastDownProgram::step(const AgentState& self, Peers peers, const StepContext& ctx) const {
  StepResult out{self, std::nullopt};
  AgentState& s = out.next;
  if (ctx.round % 2 == 1) {
    if (!s.scratch.informed && s.parent) {
      s.excursion = s.parent;
      out.move = s.parent;
    }
    return out;
  }
  if (!s.at_home()) {
    for (const AgentState* peer : peers) {
      if (peer->at_home() && peer->scratch.informed) {
        s.scratch.payload = peer->scratch.payload;
        s.scratch.informed = true;
      }
    }
    out.move = s.arrival_port;
    s.excursion.reset();
  }
  return out;
}

namespace {

Configuration tree_configuration(const PortGraph& g, const Configuration& config, const TreeEdgeSet& tree) {
  require_valid_tree(g, tree);
  if (config.size() != tree.size()) throw InvalidTree("tree and configuration sizes differ");
  const auto children = child_ports(g, tree);
  Configuration start = config;
  for (std::size_t k = 0; k < start.size(); ++k) {
    AgentState& s = start.agents[k];
    if (!s.at_home()) throw std::logic_error("tree protocols start with every agent home");
    s.parent = tree.parent[k];
    s.scratch = Scratch{};
    s.scratch.child_count = static_cast<std::uint32_t>(children[k].size());
  }
  return start;
}

}  // namespace

ConvergecastResult convergecast(const PortGraph& g, const Configuration& config, const TreeEdgeSet& tree,
                                const std::vector<std::vector<std::uint64_t>>& values, const CombineRule& rule,
                                const RunOptions& options) {
  Configuration start = tree_configuration(g, config, tree);
  if (values.size() != start.size()) throw std::invalid_argument("one convergecast value per agent required");
  for (std::size_t k = 0; k < start.size(); ++k) start.agents[k].scratch.payload = values[k];
  ConvergecastProgram program(rule);
  ConvergecastResult result;
  result.run = run(g, start, program, options);
  result.rounds = result.run.rounds;
  result.root_value = result.run.agents[tree.root()].scratch.payload;
  return result;
}

BroadcastResult broadcast_down(const PortGraph& g, const Configuration& config, const TreeEdgeSet& tree,
                               const std::vector<std::uint64_t>& value, const RunOptions& options) {
  Configuration start = tree_configuration(g, config, tree);
  const NodeIndex root = tree.root();
  start.agents[root].scratch.informed = true;
  start.agents[root].scratch.payload = value;
  BroadcastDownProgram program;
  BroadcastResult result;
  result.run = run(g, start, program, options);
  result.rounds = result.run.rounds;
  for (const auto& s : result.run.agents) result.values.push_back(s.scratch.payload);
  return result;
}

}  // namespace bfa
