#include "bfa/butterfly.hpp"

#include <algorithm>

#include "agent_util.hpp"

namespace bfa {

using detail::come_back;
using detail::leave_home;
using detail::resident_of;

namespace {

void record_neighbor(std::vector<NeighborEntry>& list, NeighborEntry entry) {
  auto it = std::lower_bound(list.begin(), list.end(), entry,
                             [](const NeighborEntry& a, const NeighborEntry& b) { return a.port < b.port; });
  if (it != list.end() && it->port == entry.port) {
    *it = entry;
  } else {
    list.insert(it, entry);
  }
}

void bump(std::vector<PairCounter>& counters, AgentId id) {
  auto it = std::lower_bound(counters.begin(), counters.end(), id,
                             [](const PairCounter& c, AgentId key) { return c.id < key; });
  if (it != counters.end() && it->id == id) {
    ++it->count;
  } else {
    counters.insert(it, PairCounter{id, 1});
  }
}

std::int64_t following_port(const AgentState& s) {
  return s.nextport + 1 < static_cast<std::int64_t>(s.home_degree) ? s.nextport + 1 : -1;
}

// Fresh sweep: movers start at port 0, everyone else hosts.
Configuration sweep_start(const PortGraph& g, const Configuration& config, const std::vector<PartitionBit>& partitions,
                          PartitionBit mover) {
  if (partitions.size() != config.size()) throw std::invalid_argument("one partition per agent required");
  Configuration start = config;
  for (std::size_t k = 0; k < start.size(); ++k) {
    AgentState& s = start.agents[k];
    if (!s.at_home()) throw std::logic_error("butterfly phases start with every agent home");
    if (partitions[k] == PartitionBit::Unset) throw std::invalid_argument("agent without a partition");
    s.partition = partitions[k];
    s.home_degree = g.degree(start.homes[k]);
    s.scratch = Scratch{};
    s.pair_counters.clear();
    const bool moves = s.partition == mover && s.home_degree > 0;
    s.nextport = moves ? 0 : -1;
    s.completion = false;
  }
  return start;
}

}  // namespace

std::uint64_t pair_butterflies(std::uint64_t common) {
  if (common <= 1) return 0;
  std::uint64_t product = 0;
  if (__builtin_mul_overflow(common, common - 1, &product)) {
    // (c/2)(c-1) or c((c-1)/2), whichever factor is even
    const std::uint64_t a = common % 2 == 0 ? common / 2 : (common - 1) / 2;
    const std::uint64_t b = common % 2 == 0 ? common - 1 : common;
    if (__builtin_mul_overflow(a, b, &product)) throw std::overflow_error("pair butterfly count overflows");
    return product;
  }
  return product / 2;
}

StepResult ScanProgram::step(const AgentState& self, Peers peers, const StepContext& ctx) const {
  StepResult out{self, std::nullopt};
  AgentState& s = out.next;
  if (ctx.round % 2 == 1) {
    if (s.partition == mover_ && s.nextport >= 0) leave_home(s, out, static_cast<Port>(s.nextport));
    return out;
  }
  if (!s.at_home()) {
    if (const AgentState* resident = resident_of(peers)) record_neighbor(s.neighbor_list, {*s.excursion, resident->id});
    come_back(s, out);
    s.nextport = following_port(s);
    if (s.nextport < 0) s.completion = true;
    return out;
  }
  if (s.partition != mover_) {
    for (const AgentState* peer : peers) {
      if (!peer->at_home()) record_neighbor(s.neighbor_list, {*peer->arrival_port, peer->id});
    }
    if (s.neighbor_list.size() == s.home_degree) s.completion = true;
  }
  return out;
}

StepResult LocalCountProgram::step(const AgentState& self, Peers peers, const StepContext& ctx) const {
  StepResult out{self, std::nullopt};
  AgentState& s = out.next;
  if (s.partition != mover_ || s.nextport < 0) {
    s.completion = true;
    return out;
  }
  if (ctx.round % 2 == 1) {
    leave_home(s, out, static_cast<Port>(s.nextport));
    return out;
  }
  if (const AgentState* resident = resident_of(peers)) {
    for (const NeighborEntry& e : resident->neighbor_list) {
      if (e.id != s.id) bump(s.pair_counters, e.id);
    }
  }
  come_back(s, out);
  s.nextport = following_port(s);
  if (s.nextport < 0) {
    std::uint64_t local = 0;
    for (const PairCounter& c : s.pair_counters) {
      if (__builtin_add_overflow(local, pair_butterflies(c.count), &local)) {
        throw std::overflow_error("local butterfly count overflows");
      }
    }
    s.scratch.local_butterflies = local;
    s.completion = true;
  }
  return out;
}

ScanResult phase1_scan(const PortGraph& g, const Configuration& config, const std::vector<PartitionBit>& partitions,
                       const RunOptions& options) {
  Configuration start = sweep_start(g, config, partitions, PartitionBit::Zero);
  for (AgentState& s : start.agents) {
    s.neighbor_list.clear();
    s.completion = s.home_degree == 0;
  }
  ScanProgram program(PartitionBit::Zero);
  ScanResult result;
  result.run = run(g, start, program, options);
  result.rounds = result.run.rounds;
  for (const AgentState& s : result.run.agents) {
    result.tables.push_back({s.id, s.neighbor_list, s.neighbor_list.size() == s.home_degree});
  }
  return result;
}

LocalCountResult phase2_local_counts(const PortGraph& g, const Configuration& config,
                                     const std::vector<PartitionBit>& partitions, PartitionBit mover,
                                     const RunOptions& options) {
  Configuration start = sweep_start(g, config, partitions, mover);
  for (AgentState& s : start.agents) {
    if (s.partition != mover && s.neighbor_list.size() != s.home_degree) {
      throw std::logic_error("agent " + std::to_string(s.id) + " has an incomplete neighbor table");
    }
    s.completion = s.nextport < 0;
  }
  LocalCountProgram program(mover);
  LocalCountResult result;
  result.run = run(g, start, program, options);
  result.rounds = result.run.rounds;
  for (const AgentState& s : result.run.agents) {
    result.counts.push_back(s.partition == mover ? std::optional(s.scratch.local_butterflies) : std::nullopt);
  }
  return result;
}

TotalResult phase3_total(const PortGraph& g, const Configuration& config, const TreeEdgeSet& tree,
                         const std::vector<std::uint64_t>& local_counts, const RunOptions& options) {
  std::vector<std::vector<std::uint64_t>> values;
  values.reserve(local_counts.size());
  for (std::uint64_t c : local_counts) values.push_back({c});
  TotalResult result;
  ConvergecastResult up = convergecast(g, config, tree, values, combine_sum, options);
  result.sum = up.root_value.empty() ? 0 : up.root_value[0];
  result.up_rounds = up.rounds;
  result.up = std::move(up.run);
  if (result.sum % 2 != 0) throw OddSum("butterfly sum " + std::to_string(result.sum) + " is odd");
  result.total = result.sum / 2;

  RunOptions down_options = options;
  down_options.round_offset = options.round_offset + result.up_rounds;
  BroadcastResult down = broadcast_down(g, continue_from(config, result.up), tree, {result.total}, down_options);
  result.down_rounds = down.rounds;
  result.down = std::move(down.run);
  for (const auto& v : down.values) result.known_total.push_back(v.empty() ? 0 : v[0]);
  return result;
}

PipelineResult run_full_pipeline(const PortGraph& g, const Configuration& config, const PipelineOptions& options) {
  PipelineResult result;
  result.election = elect_leader_and_tree(g, config, options.run);
  result.report = result.election.report;
  const auto& partitions = result.election.partitions;
  RunOptions opts = options.run;
  opts.round_offset = options.run.round_offset + result.report.rounds_total;

  ScanResult scan = phase1_scan(g, result.election.final_config, partitions, opts);
  result.report.add_phase("phase1", scan.run);
  result.tables = std::move(scan.tables);
  opts.round_offset += scan.rounds;
  Configuration current = continue_from(result.election.final_config, scan.run);

  std::vector<std::uint64_t> local(config.size(), 0);
  auto count_side = [&](PartitionBit side, const char* phase) {
    LocalCountResult counted = phase2_local_counts(g, current, partitions, side, opts);
    result.report.add_phase(phase, counted.run);
    opts.round_offset += counted.rounds;
    current = continue_from(current, counted.run);
    std::uint64_t sum = 0;
    for (std::size_t k = 0; k < counted.counts.size(); ++k) {
      if (!counted.counts[k]) continue;
      local[k] = *counted.counts[k];
      result.count.per_node[counted.run.agents[k].id] = local[k];
      sum += local[k];
    }
    return sum;
  };
  result.sum_a = count_side(PartitionBit::Zero, "phase2_a");
  std::vector<std::uint64_t> side_a(config.size(), 0);
  for (std::size_t k = 0; k < config.size(); ++k) {
    if (partitions[k] == PartitionBit::Zero) side_a[k] = local[k];
  }
  if (options.both_sides) result.sum_b = count_side(PartitionBit::One, "phase2_b");

  if (options.fault_agent) {
    for (std::size_t k = 0; k < config.size(); ++k) {
      if (current.agents[k].id != *options.fault_agent) continue;
      result.count.per_node[*options.fault_agent] += 1;
      if (partitions[k] == PartitionBit::Zero) side_a[k] += 1;
    }
  }

  TotalResult total = phase3_total(g, current, result.election.tree, side_a, opts);
  result.report.add_phase("phase3", total.up);
  result.report.add_phase("phase3", total.down);
  result.count.total = total.total;
  result.known_total = std::move(total.known_total);

  result.report.outputs["total"] = result.count.total;
  result.report.outputs["sum_a"] = result.sum_a;
  if (result.sum_b) result.report.outputs["sum_b"] = *result.sum_b;
  return result;
}

nlohmann::ordered_json results_json(const PipelineResult& result) {
  nlohmann::ordered_json j;
  j["total"] = result.count.total;
  j["per_node"] = nlohmann::ordered_json::object();
  for (const auto& [id, count] : result.count.per_node) j["per_node"][std::to_string(id)] = count;
  const auto report = result.report.to_json();
  j["rounds"] = report["rounds_per_phase"];
  j["peak_memory_bits"] = report["peak_memory_bits"];
  return j;
}

}  // namespace bfa
