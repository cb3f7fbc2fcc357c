#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "bfa/experiment.hpp"

int main(int argc, char** argv) {
  bfa::configure_logging();
  CLI::App app{"Mobile-agent butterfly counting simulator"};
  app.set_help_flag("-h,--help", "Show help");

  bfa::ExperimentConfig config;
  std::uint64_t fault = 0;
  app.add_option("--gen", config.gen,
                 "Generator and parameters: complete-bipartite A B | random-bipartite A B P | path K | clique K | "
                 "random-general N P")
      ->expected(1, 4);
  app.add_option("--graph", config.graph_path, "Graph file: 'n_a n_b m' header, then m lines 'i j' or 'i j p q'");
  app.add_option("--ids", config.ids, "seq | rand | list:i,j,...")->capture_default_str();
  app.add_option("--seed", config.seed, "Seed for generators and id shuffling")->capture_default_str();
  app.add_option("--protocol", config.protocol, "meeting-demo | known-leader | election | butterfly-full")
      ->capture_default_str();
  app.add_flag("--verify", config.verify, "Compare every agent output with the oracle");
  app.add_option("--trace", config.trace_path, "Write the movement trace as JSON lines");
  app.add_option("--report", config.report_path, "Write the run report as JSON");
  app.add_option("--max-rounds", config.max_rounds, "Round limit per phase (0: 64 n (L+1))");
  app.add_flag("--parallel", config.parallel, "Run the per-agent compute step with OpenMP");
  auto* fault_opt = app.add_option("--inject-fault", fault, "Add one to this agent's local butterfly count");

  bfa::SweepConfig sweep;
  std::string sweep_out;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a grid of instances and print one CSV row each");
  sweep_cmd->add_option("--family", sweep.family, "random-bipartite | random-general | complete-bipartite | path")
      ->capture_default_str();
  sweep_cmd->add_option("--sizes", sweep.sizes, "Node counts")->required()->delimiter(',');
  sweep_cmd->add_option("--probs", sweep.edge_probs, "Edge probabilities")->delimiter(',');
  sweep_cmd->add_option("--seeds", sweep.seeds, "Instances per size and probability")->capture_default_str();
  sweep_cmd->add_option("--seed", sweep.base_seed, "First seed")->capture_default_str();
  sweep_cmd->add_option("--ids", sweep.ids, "seq | rand")->capture_default_str();
  sweep_cmd->add_option("--protocol", sweep.protocol, "Protocol for every instance")->capture_default_str();
  sweep_cmd->add_option("--out", sweep_out, "CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : bfa::kExitConfig;
  }

  if (*sweep_cmd) {
    try {
      const std::string csv = bfa::run_sweep(sweep);
      if (sweep_out.empty()) {
        std::cout << csv;
      } else {
        std::ofstream file(sweep_out, std::ios::binary);
        if (!file) {
          std::cerr << "cannot write " << sweep_out << "\n";
          return bfa::kExitConfig;
        }
        file << csv;
      }
    } catch (const bfa::ConfigError& e) {
      std::cerr << e.what() << "\n";
      return bfa::kExitConfig;
    }
    return bfa::kExitOk;
  }

  if (*fault_opt) config.inject_fault = static_cast<bfa::AgentId>(fault);
  const bfa::ExperimentOutcome outcome = bfa::run_experiment(config);
  if (outcome.exit_code == bfa::kExitOk || outcome.exit_code == bfa::kExitMismatch) {
    std::cout << outcome.message << "\n";
    if (!outcome.bounds.empty()) std::cout << bfa::format_bound_table(outcome.bounds);
    for (const auto& m : outcome.mismatches) std::cout << "mismatch: " << m << "\n";
  }
  if (outcome.exit_code != bfa::kExitOk) std::cerr << "error: " << outcome.message << "\n";
  return outcome.exit_code;
}
