#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "bfa/election.hpp"

namespace bfa {

/// C(common, 2) butterflies through a same-side pair with `common` shared
/// neighbors. Throws std::overflow_error past 64 bits.
std::uint64_t pair_butterflies(std::uint64_t common);

/// What an agent learned about its neighborhood in the scan: (port, neighbor id), by port.
struct NeighborTable {
  AgentId owner = 0;
  std::vector<NeighborEntry> entries;
  bool complete = false;
};

/// Agents of the moving side walk port 0, 1, ... one port per two rounds; every
/// agent meeting a visitor or a resident writes down the other's id and the port it used.
class ScanProgram final : public AgentProgram {
 public:
  explicit ScanProgram(PartitionBit mover) : mover_(mover) {}
  std::string name() const override { return "phase1"; }
  StepResult step(const AgentState& self, Peers peers, const StepContext& ctx) const override;
  bool local_done(const AgentState& self) const override { return self.completion; }

 private:
  PartitionBit mover_;
};

/// Agents of the moving side revisit every neighbor, read its table and count
/// how often each other same-side id shows up there. The local count is the sum
/// of pair_butterflies over those counters.
class LocalCountProgram final : public AgentProgram {
 public:
  explicit LocalCountProgram(PartitionBit mover) : mover_(mover) {}
  std::string name() const override { return mover_ == PartitionBit::Zero ? "phase2_a" : "phase2_b"; }
  StepResult step(const AgentState& self, Peers peers, const StepContext& ctx) const override;
  bool local_done(const AgentState& self) const override { return self.completion; }

 private:
  PartitionBit mover_;
};

struct ScanResult {
  std::vector<NeighborTable> tables;  // by agent index
  Round rounds = 0;
  RunResult run;
};

/// partitions[k] is agent k's side; PartitionBit::Zero moves. Every agent must be home.
ScanResult phase1_scan(const PortGraph& g, const Configuration& config, const std::vector<PartitionBit>& partitions,
                       const RunOptions& options = {});

struct LocalCountResult {
  std::vector<std::optional<std::uint64_t>> counts;  // by agent index, set for the moving side
  Round rounds = 0;
  RunResult run;
};

/// config must carry the scan's neighbor tables (for example ScanResult::run via continue_from).
LocalCountResult phase2_local_counts(const PortGraph& g, const Configuration& config,
                                     const std::vector<PartitionBit>& partitions, PartitionBit mover,
                                     const RunOptions& options = {});

struct ButterflyCount {
  std::map<AgentId, std::uint64_t> per_node;
  std::uint64_t total = 0;
};

struct TotalResult {
  std::uint64_t sum = 0;                 // what the root collected
  std::uint64_t total = 0;
  std::vector<std::uint64_t> known_total;  // by agent index, after the downcast
  Round up_rounds = 0;
  Round down_rounds = 0;
  RunResult up;
  RunResult down;
};

/// Sums local_counts (by agent index) at the root of tree and sends half of it
/// back down. Throws OddSum when the sum is odd.
TotalResult phase3_total(const PortGraph& g, const Configuration& config, const TreeEdgeSet& tree,
                         const std::vector<std::uint64_t>& local_counts, const RunOptions& options = {});

struct PipelineOptions {
  RunOptions run;
  bool both_sides = true;
  /// Test hook: add one to this agent's local count before aggregation.
  std::optional<AgentId> fault_agent;
};

struct PipelineResult {
  ButterflyCount count;
  ElectionResult election;
  std::vector<NeighborTable> tables;
  std::uint64_t sum_a = 0;
  std::optional<std::uint64_t> sum_b;  // set when the B side was counted too
  std::vector<std::uint64_t> known_total;
  RunReport report;
};

/// Election and tree, scan, local counts on side A (and B), then the total.
PipelineResult run_full_pipeline(const PortGraph& g, const Configuration& config, const PipelineOptions& options = {});

/// {"total", "per_node", "rounds", "peak_memory_bits"}
nlohmann::ordered_json results_json(const PipelineResult& result);

}  // namespace bfa
