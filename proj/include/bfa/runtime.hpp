#pragma once

// Synchronous Communicate-Compute-Move engine.
//
// Every round: each agent reads the round-start state of the agents sharing its
// node, computes its next state from (own state, those snapshots, round), and
// then all chosen moves happen at once. Agents are never observed on edges.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bfa/graph.hpp"
#include "bfa/types.hpp"

namespace bfa {

enum class PartitionBit : std::uint8_t { Unset, Zero, One };

inline PartitionBit opposite(PartitionBit p) {
  return p == PartitionBit::Zero ? PartitionBit::One : p == PartitionBit::One ? PartitionBit::Zero : PartitionBit::Unset;
}

// How the current meeting window ended for the agent that ran it.
enum class WindowOutcome : std::uint8_t { Pending, Resolved, ChildComplete, Absorbed, Restart };

struct NeighborEntry {
  Port port = 0;
  AgentId id = 0;
  friend bool operator==(const NeighborEntry&, const NeighborEntry&) = default;
};

struct PairCounter {
  AgentId id = 0;
  std::uint32_t count = 0;
  friend bool operator==(const PairCounter&, const PairCounter&) = default;
};

// Protocol-owned working variables. Every field here is counted by account_memory.
struct Scratch {
  OptPort target;            // port visited during the current window/slot
  OptPort cursor;            // next child to poll or report to
  OptPort observed_sibling;  // sibling pointer read from a completed child
  WindowOutcome outcome = WindowOutcome::Pending;
  std::uint32_t retries = 0;
  std::uint32_t child_count = 0;
  std::uint32_t reported = 0;
  bool informed = false;
  bool delivered = false;
  std::vector<std::uint64_t> payload;
  std::uint64_t local_butterflies = 0;

  friend bool operator==(const Scratch&, const Scratch&) = default;
};

struct AgentState {
  AgentId id = 0;
  AgentId treelabel = 0;
  PartitionBit partition = PartitionBit::Unset;
  OptPort parent;
  OptPort child;
  OptPort sibling;
  std::int64_t nextport = -1;  // -1: nothing left to explore
  bool completion = false;
  bool leader = false;
  std::uint32_t home_degree = 0;

  OptPort excursion;     // port used to leave home; empty while home
  OptPort arrival_port;  // set by the engine on every move: port of the current node we came in by

  Scratch scratch;
  std::vector<NeighborEntry> neighbor_list;
  std::vector<PairCounter> pair_counters;

  bool at_home() const { return !excursion.has_value(); }

  friend bool operator==(const AgentState&, const AgentState&) = default;
};

/// Agents and where they live. agents[k] has home node homes[k].
struct Configuration {
  std::vector<AgentState> agents;
  std::vector<NodeIndex> homes;
  AgentId lambda = 0;

  std::size_t size() const { return agents.size(); }
  /// L = max(1, ceil(log2(lambda + 1))).
  std::uint32_t id_bits() const { return bit_width_for(lambda); }
};

/// One agent per node; ids[k] is placed on node k. Throws std::invalid_argument
/// on duplicate ids or a size mismatch.
Configuration place_dispersed(const PortGraph& g, const std::vector<AgentId>& ids);

struct StepContext {
  Round round = 1;          // 1-based, local to the current run
  std::uint32_t degree = 0; // degree of the node the agent currently occupies
  AgentId lambda = 0;
};

struct StepResult {
  AgentState next;
  OptPort move;  // empty: stay
};

using Peers = std::span<const AgentState* const>;

class AgentProgram {
 public:
  virtual ~AgentProgram() = default;

  virtual std::string name() const = 0;

  /// Must be a pure function of its arguments. Peers are ordered by ascending id.
  virtual StepResult step(const AgentState& self, Peers peers, const StepContext& ctx) const = 0;

  virtual bool local_done(const AgentState& self) const = 0;

  /// Protocol-level condition checked together with every agent being locally done.
  virtual bool terminator(std::span<const AgentState> agents) const {
    (void)agents;
    return true;
  }
};

struct TraceEvent {
  enum class Action : std::uint8_t { Stay, Move };
  Round round = 0;
  AgentId agent = 0;
  NodeIndex node = 0;
  Action action = Action::Stay;
  OptPort port;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void record(const TraceEvent& event) = 0;
};

class TraceBuffer final : public TraceSink {
 public:
  void record(const TraceEvent& event) override { events.push_back(event); }
  std::vector<TraceEvent> events;
};

/// Writes one JSON object per line.
class JsonlTraceWriter final : public TraceSink {
 public:
  explicit JsonlTraceWriter(std::ostream& out) : out_(out) {}
  void record(const TraceEvent& event) override;

 private:
  std::ostream& out_;
};

std::string to_jsonl(const TraceEvent& event);

struct MemoryWidths {
  AgentId lambda = 0;
  std::uint32_t max_degree = 0;

  std::uint32_t id_bits() const { return bit_width_for(lambda); }
  std::uint32_t port_bits() const { return bit_width_for(max_degree) + 1; }
  std::uint32_t degree_bits() const { return bit_width_for(max_degree); }
};

struct MemoryBreakdown {
  std::uint64_t state_bits = 0;  // everything except neighbor tables and pair counters
  std::uint64_t table_bits = 0;
  std::uint64_t total() const { return state_bits + table_bits; }
};

MemoryBreakdown account_memory_breakdown(const AgentState& state, const MemoryWidths& widths);
std::uint64_t account_memory(const AgentState& state, const MemoryWidths& widths);

using RoundObserver =
    std::function<void(Round local_round, std::span<const AgentState> agents, std::span<const NodeIndex> positions)>;

struct RunOptions {
  Round max_rounds = 0;    // 0: 64 * n * (L + 1)
  Round round_offset = 0;  // added to local rounds in trace events
  TraceSink* trace = nullptr;
  RoundObserver observer;
  bool parallel = false;   // run the per-agent Compute step with OpenMP
};

struct RunResult {
  std::vector<AgentState> agents;
  std::vector<NodeIndex> positions;
  Round rounds = 0;
  std::vector<std::uint64_t> peak_bits;        // per agent index, all fields
  std::vector<std::uint64_t> peak_state_bits;  // per agent index, excluding tables
  std::uint64_t trace_digest = 0;
};

Round default_max_rounds(std::size_t n, AgentId lambda);

/// Runs the program from the given configuration until every agent is locally
/// done and the terminator holds. Throws RoundLimitExceeded or IllegalPort.
RunResult run(const PortGraph& g, const Configuration& config, const AgentProgram& program,
              const RunOptions& options = {});

/// Configuration whose agents are the result of a previous run. All agents must be home.
Configuration continue_from(const Configuration& previous, const RunResult& result);

}  // namespace bfa
