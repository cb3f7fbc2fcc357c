#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "bfa/graph.hpp"
#include "bfa/runtime.hpp"

namespace bfa {

/// Bad flags, unknown generator, wrong id list and similar user errors (exit 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum ExitCode : int { kExitOk = 0, kExitMismatch = 1, kExitConfig = 2, kExitRoundLimit = 3 };

struct ExperimentConfig {
  std::vector<std::string> gen;  // generator name followed by its parameters
  std::string graph_path;
  std::string ids = "rand";      // seq | rand | list:i,j,...
  std::uint64_t seed = 1;
  std::string protocol = "butterfly-full";  // meeting-demo | known-leader | election | butterfly-full
  bool verify = false;
  std::string trace_path;
  std::string report_path;
  Round max_rounds = 0;
  bool parallel = false;
  std::optional<AgentId> inject_fault;  // butterfly-full only: corrupt one local count
};

struct LoadedGraph {
  PortGraph graph;
  std::optional<Bipartition> parts;  // known for bipartite generators and files
  std::string description;
};

/// Throws ConfigError or GraphFormatError.
LoadedGraph build_graph(const ExperimentConfig& config);

/// seq: 0..n-1. rand: the first n entries of a seeded shuffle of 0..2n-1. Throws ConfigError.
std::vector<AgentId> assign_ids(const std::string& mode, std::size_t n, std::uint64_t seed);

struct BoundCheck {
  std::string quantity;
  double measured = 0;
  std::string expression;
  double bound = 0;
  bool holds() const { return measured <= bound; }
};

struct ExperimentOutcome {
  int exit_code = kExitOk;
  std::string message;                  // error or one-line summary
  std::vector<std::string> mismatches;  // verification failures
  std::vector<BoundCheck> bounds;
  nlohmann::ordered_json report;
};

/// Runs one experiment and writes the requested report and trace files. Never throws.
ExperimentOutcome run_experiment(const ExperimentConfig& config);

std::string format_bound_table(const std::vector<BoundCheck>& bounds);

struct SweepConfig {
  std::string family = "random-bipartite";  // random-bipartite | random-general | complete-bipartite | path
  std::vector<std::uint32_t> sizes;         // n per instance group
  std::vector<double> edge_probs{0.2};
  std::uint32_t seeds = 1;                  // instances per (size, prob)
  std::uint64_t base_seed = 1;
  std::string ids = "rand";
  std::string protocol = "butterfly-full";
  bool parallel = true;                     // run instances concurrently
};

/// Fixed header, one row per instance in (size, prob, seed) order.
std::string sweep_csv_header();
std::string run_sweep(const SweepConfig& config);

/// Reads BUTTERFLY_AGENTS_LOG (trace, debug, info, warn, error, off); default warn.
void configure_logging();

}  // namespace bfa
