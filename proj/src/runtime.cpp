#include "bfa/runtime.hpp"

#include <algorithm>
#include <exception>
#include <numeric>
#include <ostream>
#include <set>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bfa {

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

void mix(std::uint64_t& h, std::uint64_t value) {
  for (int i = 0; i < 8; ++i) {
    h ^= (value >> (8 * i)) & 0xffu;
    h *= kFnvPrime;
  }
}

}  // namespace

Configuration place_dispersed(const PortGraph& g, const std::vector<AgentId>& ids) {
  if (ids.size() != g.node_count()) {
    throw std::invalid_argument("dispersed placement needs exactly one id per node (" + std::to_string(ids.size()) +
                                " ids for " + std::to_string(g.node_count()) + " nodes)");
  }
  std::set<AgentId> seen;
  for (AgentId id : ids) {
    if (!seen.insert(id).second) throw std::invalid_argument("duplicate agent id " + std::to_string(id));
  }
  Configuration config;
  config.lambda = ids.empty() ? 0 : *std::max_element(ids.begin(), ids.end());
  for (NodeIndex k = 0; k < ids.size(); ++k) {
    AgentState s;
    s.id = ids[k];
    s.treelabel = ids[k];
    s.home_degree = g.degree(k);
    config.agents.push_back(std::move(s));
    config.homes.push_back(k);
  }
  return config;
}

std::string to_jsonl(const TraceEvent& event) {
  std::string line = "{\"round\":" + std::to_string(event.round) + ",\"agent\":" + std::to_string(event.agent) +
                     ",\"node\":" + std::to_string(event.node) + ",\"action\":\"" +
                     (event.action == TraceEvent::Action::Move ? "move" : "stay") + "\",\"port\":" +
                     (event.port ? std::to_string(*event.port) : std::string("null")) + "}";
  return line;
}

void JsonlTraceWriter::record(const TraceEvent& event) { out_ << to_jsonl(event) << '\n'; }

MemoryBreakdown account_memory_breakdown(const AgentState& s, const MemoryWidths& w) {
  const std::uint64_t id_bits = w.id_bits();
  const std::uint64_t port_bits = w.port_bits();
  MemoryBreakdown m;
  // id, treelabel, meeting-window position
  m.state_bits += 3 * id_bits;
  // parent, child, sibling, nextport, excursion, arrival, target, cursor, observed sibling
  m.state_bits += 9 * port_bits;
  // completion, leader, informed, delivered
  m.state_bits += 4;
  m.state_bits += 2;  // partition: unset / 0 / 1
  m.state_bits += 3;  // window outcome
  m.state_bits += bit_width_for(s.home_degree) + bit_width_for(s.scratch.child_count) +
                  bit_width_for(s.scratch.reported) + bit_width_for(s.scratch.retries);
  for (std::uint64_t word : s.scratch.payload) m.state_bits += bit_width_for(word);
  m.state_bits += bit_width_for(s.scratch.local_butterflies);

  m.table_bits += s.neighbor_list.size() * (id_bits + w.degree_bits());
  m.table_bits += s.pair_counters.size() * (id_bits + w.degree_bits());
  return m;
}

std::uint64_t account_memory(const AgentState& state, const MemoryWidths& widths) {
  return account_memory_breakdown(state, widths).total();
}

Round default_max_rounds(std::size_t n, AgentId lambda) {
  return 64ull * n * (bit_width_for(lambda) + 1ull);
}

RunResult run(const PortGraph& g, const Configuration& config, const AgentProgram& program,
              const RunOptions& options) {
  const std::size_t n = config.size();
  if (config.homes.size() != n) throw std::invalid_argument("configuration homes/agents size mismatch");
  for (NodeIndex h : config.homes) {
    if (h >= g.node_count()) throw std::invalid_argument("agent home outside the graph");
  }

  RunResult result;
  result.agents = config.agents;
  result.positions = config.homes;
  const MemoryWidths widths{config.lambda, g.max_degree()};
  const Round max_rounds = options.max_rounds ? options.max_rounds : default_max_rounds(n, config.lambda);

  std::vector<std::uint32_t> by_id(n);
  std::iota(by_id.begin(), by_id.end(), 0u);
  std::sort(by_id.begin(), by_id.end(),
            [&](std::uint32_t a, std::uint32_t b) { return result.agents[a].id < result.agents[b].id; });

  result.peak_bits.resize(n);
  result.peak_state_bits.resize(n);
  auto update_peaks = [&] {
    for (std::size_t k = 0; k < n; ++k) {
      const auto m = account_memory_breakdown(result.agents[k], widths);
      result.peak_bits[k] = std::max(result.peak_bits[k], m.total());
      result.peak_state_bits[k] = std::max(result.peak_state_bits[k], m.state_bits);
    }
  };
  auto finished = [&] {
    for (const auto& s : result.agents) {
      if (!program.local_done(s)) return false;
    }
    return program.terminator(result.agents);
  };

  update_peaks();
  std::uint64_t digest = kFnvOffset;
  if (finished()) {
    result.trace_digest = digest;
    return result;
  }

  const std::size_t node_count = g.node_count();
  std::vector<std::uint32_t> node_start(node_count + 1);
  std::vector<std::uint32_t> occupants(n);
  std::vector<AgentState> next(n);
  std::vector<OptPort> moves(n);

  for (Round round = 1;; ++round) {
    if (round > max_rounds) {
      throw RoundLimitExceeded(program.name() + ": no termination within " + std::to_string(max_rounds) + " rounds");
    }

    // Communicate: bucket agents by node, ascending id inside each bucket.
    std::fill(node_start.begin(), node_start.end(), 0u);
    for (std::size_t k = 0; k < n; ++k) ++node_start[result.positions[k] + 1];
    for (std::size_t v = 0; v < node_count; ++v) node_start[v + 1] += node_start[v];
    {
      std::vector<std::uint32_t> fill(node_start.begin(), node_start.end() - 1);
      for (std::uint32_t k : by_id) occupants[fill[result.positions[k]]++] = k;
    }

    // Compute: pure per-agent steps over the round-start snapshot.
    std::exception_ptr failure;
#pragma omp parallel for schedule(static) if (options.parallel)
    for (std::int64_t kk = 0; kk < static_cast<std::int64_t>(n); ++kk) {
      const auto k = static_cast<std::size_t>(kk);
      try {
        const NodeIndex node = result.positions[k];
        std::vector<const AgentState*> peers;
        for (std::uint32_t i = node_start[node]; i < node_start[node + 1]; ++i) {
          if (occupants[i] != k) peers.push_back(&result.agents[occupants[i]]);
        }
        const StepContext ctx{round, g.degree(node), config.lambda};
        StepResult step = program.step(result.agents[k], peers, ctx);
        step.next.id = result.agents[k].id;
        step.next.arrival_port = result.agents[k].arrival_port;
        next[k] = std::move(step.next);
        moves[k] = step.move;
      } catch (...) {
#pragma omp critical(bfa_run_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);

    // Move: simultaneous, applied in ascending id order for the trace.
    for (std::uint32_t k : by_id) {
      const NodeIndex node = result.positions[k];
      TraceEvent event{options.round_offset + round, result.agents[k].id, node, TraceEvent::Action::Stay,
                       std::nullopt};
      if (moves[k]) {
        const Port p = *moves[k];
        if (p >= g.degree(node)) {
          throw IllegalPort(program.name() + ": agent " + std::to_string(event.agent) + " chose port " +
                            std::to_string(p) + " at a node of degree " + std::to_string(g.degree(node)));
        }
        const PortEntry& e = g.follow(node, p);
        result.positions[k] = e.neighbor;
        next[k].arrival_port = e.reciprocal;
        event.action = TraceEvent::Action::Move;
        event.port = p;
      }
      mix(digest, event.round);
      mix(digest, event.agent);
      mix(digest, event.node);
      mix(digest, event.port ? *event.port + 1ull : 0ull);
      if (options.trace) options.trace->record(event);
    }
    result.agents.swap(next);
    update_peaks();
    if (options.observer) options.observer(round, result.agents, result.positions);

    if (finished()) {
      result.rounds = round;
      break;
    }
  }
  result.trace_digest = digest;
  return result;
}

Configuration continue_from(const Configuration& previous, const RunResult& result) {
  for (std::size_t k = 0; k < result.agents.size(); ++k) {
    if (result.positions[k] != previous.homes[k] || !result.agents[k].at_home()) {
      throw std::logic_error("agent " + std::to_string(result.agents[k].id) + " is not home at the end of a run");
    }
  }
  Configuration config = previous;
  config.agents = result.agents;
  return config;
}

}  // namespace bfa
