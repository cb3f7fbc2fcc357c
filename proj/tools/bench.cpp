// Serial vs OpenMP timings for the two parallel kernels: the oracle's per-node
// butterfly count and the engine's per-agent compute step.
#include <chrono>
#include <cstdio>
#include <functional>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "bfa/election.hpp"
#include "bfa/oracle.hpp"
#include "bfa/rng.hpp"

namespace {

double seconds(const std::function<void()>& body, int reps) {
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) body();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / reps;
}

}  // namespace

int main() {
  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif
  std::printf("threads: %d\n", threads);
  std::printf("%-28s %8s %12s %12s %8s\n", "kernel", "n", "serial_s", "parallel_s", "same");

  for (std::uint32_t side : {200u, 400u, 800u}) {
    const auto gg = bfa::make_random_connected_bipartite(side, side, 0.1, 7);
    const auto coloring = bfa::oracle_coloring(gg.graph);
    std::vector<std::uint64_t> serial, parallel;
    const double ts = seconds([&] { serial = bfa::oracle_per_node_butterflies_serial(gg.graph, coloring); }, 3);
    const double tp = seconds([&] { parallel = bfa::oracle_per_node_butterflies(gg.graph, coloring); }, 3);
    std::printf("%-28s %8u %12.5f %12.5f %8s\n", "oracle per-node butterflies", 2 * side, ts, tp,
                serial == parallel ? "yes" : "NO");
  }

  for (std::uint32_t side : {25u, 50u, 100u}) {
    const auto gg = bfa::make_random_connected_bipartite(side, side, 0.1, 11);
    std::vector<bfa::AgentId> ids(gg.graph.node_count());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<bfa::AgentId>(ids.size() - i);
    const auto config = bfa::place_dispersed(gg.graph, ids);
    bfa::RunOptions serial_opts, parallel_opts;
    parallel_opts.parallel = true;
    bfa::ElectionStageResult a, b;
    const double ts = seconds([&] { a = bfa::run_election_stage(gg.graph, config, serial_opts); }, 1);
    const double tp = seconds([&] { b = bfa::run_election_stage(gg.graph, config, parallel_opts); }, 1);
    std::printf("%-28s %8u %12.5f %12.5f %8s\n", "engine election rounds", 2 * side, ts, tp,
                a.run.trace_digest == b.run.trace_digest && a.run.agents == b.run.agents ? "yes" : "NO");
  }
  return 0;
}
