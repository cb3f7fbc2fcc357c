// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "bfa/bounds.hpp"
#include "bfa/butterfly.hpp"
#include "bfa/experiment.hpp"
#include "bfa/oracle.hpp"
#include "bfa/rng.hpp"

using namespace bfa;

namespace {

struct Criterion {
  std::string name;
  std::uint64_t cases = 0;
  std::uint64_t failures = 0;
  std::string detail;
  std::string first_failure;

  void check(bool ok, const std::string& what) {
    ++cases;
    if (ok) return;
    if (failures++ == 0) first_failure = what;
  }
  bool passed() const { return failures == 0 && cases > 0; }
};

std::vector<AgentId> random_ids(std::size_t n, AgentId max_id, Rng& rng) {
  std::vector<AgentId> pool(max_id + 1);
  std::iota(pool.begin(), pool.end(), 0);
  rng.shuffle(pool);
  pool.resize(n);
  return pool;
}

std::uint64_t pairs(std::uint64_t k) { return k * (k - 1) / 2; }

NodeIndex index_of(const std::vector<AgentId>& ids, AgentId id) {
  return static_cast<NodeIndex>(std::find(ids.begin(), ids.end(), id) - ids.begin());
}

Port port_towards(const PortGraph& g, NodeIndex from, NodeIndex to) {
  for (Port p = 0; p < g.degree(from); ++p) {
    if (g.follow(from, p).neighbor == to) return p;
  }
  throw std::logic_error("no edge");
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string fmt(const char* format, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

// A1: every ordered pair of distinct ids up to 255 meets within one aligned window.
Criterion meeting_criterion() {
  Criterion c{"A1 meeting protocol"};
  const auto edge = make_path(2).graph;
  Round latest = 0;
  for (AgentId u = 0; u <= 255; ++u) {
    for (AgentId v = 0; v <= 255; ++v) {
      if (u == v) continue;
      auto config = place_dispersed(edge, {u, v});
      config.lambda = 255;
      const auto r = run_meeting_window(edge, config, {Port{0}, Port{0}});
      std::optional<Round> first;
      for (const auto& a : r.agents) {
        for (const auto& m : {a.met_as_visitor, a.met_as_host}) {
          if (m && (!first || *m < *first)) first = m;
        }
      }
      c.check(first && *first <= 4 * 8, "pair " + std::to_string(u) + "," + std::to_string(v));
      if (first) latest = std::max(latest, *first);
    }
  }
  // worked example: 0010 visits 0110, which is busy visiting a third agent
  const auto path = make_path(3).graph;
  const auto config = place_dispersed(path, {0b0010, 0b0110, 15});
  const auto r = run_meeting_window(path, config, {port_towards(path, 0, 1), port_towards(path, 1, 2), std::nullopt});
  c.check(r.agents[0].met_as_visitor == Round{13}, "worked example meets at window round 13 (bit 6)");
  c.detail = fmt("%.0f ordered pairs, latest first meeting at round %.0f of 32", static_cast<double>(c.cases - 1),
                 static_cast<double>(latest));
  return c;
}

GeneratedGraph random_bipartite(std::uint32_t n, Rng& rng, double max_p) {
  const std::uint32_t a = 1 + static_cast<std::uint32_t>(rng.below(n - 1));
  const double p = 0.01 + rng.unit() * max_p;
  return make_random_connected_bipartite(a, n - a, p, rng.next());
}

// A2: known-leader partitions equal the oracle coloring; assignment within 4n rounds.
Criterion known_leader_criterion() {
  Criterion c{"A2 known-leader partition"};
  Rng rng(2002);
  double worst = 0;
  for (int i = 0; i < 50; ++i) {
    const auto n = static_cast<std::uint32_t>(4 + rng.below(197));
    const auto gg = random_bipartite(n, rng, 0.25);
    const auto& g = gg.graph;
    const auto ids = random_ids(n, 2 * n, rng);
    const auto leader = static_cast<NodeIndex>(rng.below(n));
    const auto r = known_leader_tree(g, place_dispersed(g, ids), ids[leader]);
    const auto coloring = oracle_coloring(g);
    bool match = true;
    for (NodeIndex v = 0; v < n; ++v) {
      match &= r.partitions[v] == (coloring[v] == coloring[leader] ? PartitionBit::Zero : PartitionBit::One);
    }
    c.check(match, "partition mismatch on instance " + std::to_string(i));
    c.check(r.assignment_rounds <= 4ull * n, "assignment took " + std::to_string(r.assignment_rounds) + " rounds, n=" +
                                                 std::to_string(n));
    worst = std::max(worst, static_cast<double>(r.assignment_rounds) / n);
  }
  c.detail = fmt("50 graphs, max assignment rounds / n = %.2f (bound 4)", worst);
  return c;
}

struct ElectionInstance {
  PortGraph graph;
  std::optional<Bipartition> parts;
  std::vector<AgentId> ids;
  ElectionResult result;
};

std::vector<ElectionInstance> election_instances() {
  std::vector<ElectionInstance> out;
  Rng rng(3003);
  for (int i = 0; i < 50; ++i) {
    ElectionInstance inst;
    const auto n = static_cast<std::uint32_t>(2 + rng.below(199));
    if (i % 2 == 0) {
      auto gg = random_bipartite(n, rng, 0.2);
      inst.graph = std::move(gg.graph);
      inst.parts = std::move(gg.parts);
    } else {
      inst.graph = make_random_connected_graph(n, 0.005 + rng.unit() * 0.15, rng.next());
    }
    inst.ids = random_ids(n, 1024, rng);
    inst.result = elect_leader_and_tree(inst.graph, place_dispersed(inst.graph, inst.ids));
    out.push_back(std::move(inst));
  }
  return out;
}

// A3: unique minimum-id leader, valid tree, labels agree, rounds and state within the fixed constants.
Criterion election_criterion(const std::vector<ElectionInstance>& instances) {
  Criterion c{"A3 election"};
  double worst_rounds = 0, worst_bits = 0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    const auto& e = inst.result;
    const std::size_t n = inst.graph.node_count();
    const AgentId min_id = *std::min_element(inst.ids.begin(), inst.ids.end());
    const std::string tag = " (instance " + std::to_string(i) + ")";
    c.check(e.leader == min_id, "leader is not the minimum id" + tag);
    c.check(std::all_of(e.treelabels.begin(), e.treelabels.end(), [&](AgentId l) { return l == min_id; }),
            "treelabels disagree" + tag);
    const auto tree = check_spanning_tree(inst.graph, e.election_tree, index_of(inst.ids, min_id));
    c.check(tree.is_spanning_tree, "election tree invalid: " + tree.problem + tag);
    const std::uint32_t l = bit_width_for(*std::max_element(inst.ids.begin(), inst.ids.end()));
    const double rounds = static_cast<double>(e.report.phase_rounds("election"));
    const double bits = static_cast<double>(e.report.max_peak_state_bits());
    c.check(rounds <= kElectionRoundConstant * n * l, "rounds above c*n*L" + tag);
    c.check(bits <= kElectionStateConstant * l, "state bits above c'*L" + tag);
    worst_rounds = std::max(worst_rounds, rounds / (static_cast<double>(n) * l));
    worst_bits = std::max(worst_bits, bits / l);
  }
  c.detail = fmt("c = %.0f (max measured %.2f)", kElectionRoundConstant, worst_rounds) +
             fmt(", c' = %.0f (max measured %.2f)", kElectionStateConstant, worst_bits);
  return c;
}

// A4: election tree diameter at most 2 min(|A|,|B|) on the bipartite instances.
Criterion diameter_criterion(const std::vector<ElectionInstance>& instances) {
  Criterion c{"A4 tree diameter"};
  double worst = 0;
  for (const auto& inst : instances) {
    if (!inst.parts) continue;
    const AgentId min_id = *std::min_element(inst.ids.begin(), inst.ids.end());
    const auto tree = check_spanning_tree(inst.graph, inst.result.election_tree, index_of(inst.ids, min_id));
    const std::size_t bound = 2 * inst.parts->min_side();
    c.check(tree.is_spanning_tree && tree.diameter <= bound,
            "diameter " + std::to_string(tree.diameter) + " > " + std::to_string(bound));
    worst = std::max(worst, static_cast<double>(tree.diameter) / bound);
  }
  c.detail = fmt("%.0f bipartite instances, max diameter / (2 min side) = %.2f", static_cast<double>(c.cases), worst);
  return c;
}

// A7: every agent learns 2m, the side sizes and Delta.
Criterion aggregate_criterion(const std::vector<ElectionInstance>& instances) {
  Criterion c{"A7 aggregates"};
  for (const auto& inst : instances) {
    if (!inst.parts) continue;
    const auto& g = inst.graph;
    const AgentId min_id = *std::min_element(inst.ids.begin(), inst.ids.end());
    const NodeIndex leader = index_of(inst.ids, min_id);
    const bool leader_on_a = inst.parts->side[leader] == Side::A;
    const GraphKnowledge want{g.node_count(), leader_on_a ? inst.parts->size_a : inst.parts->size_b,
                              leader_on_a ? inst.parts->size_b : inst.parts->size_a, g.max_degree(),
                              2 * g.edge_count()};
    for (const auto& k : inst.result.knowledge) c.check(k == want, "aggregate mismatch");
  }
  c.detail = fmt("%.0f agent checks", static_cast<double>(c.cases));
  return c;
}

struct ButterflyInstance {
  std::string name;
  GeneratedGraph gg;
  std::optional<std::uint64_t> closed_form;
};

// A5, A6 and the oracle half of A8 share the same instances.
void butterfly_criteria(Criterion& a5, Criterion& a6, Criterion& a8_oracle) {
  std::vector<ButterflyInstance> instances;
  Rng rng(5005);
  for (int i = 0; i < 100; ++i) {
    const auto a = static_cast<std::uint32_t>(1 + rng.below(64));
    const auto b = static_cast<std::uint32_t>(1 + rng.below(64));
    const double p = 0.02 + rng.unit() * 0.4;
    instances.push_back({"random " + std::to_string(i), make_random_connected_bipartite(a, b, p, rng.next()), {}});
  }
  for (std::uint32_t a = 1; a <= 12; ++a) {
    for (std::uint32_t b = 1; b <= 12; ++b) {
      instances.push_back({"K" + std::to_string(a) + "," + std::to_string(b), make_complete_bipartite(a, b),
                           pairs(a) * pairs(b)});
    }
  }
  for (std::uint32_t k = 2; k <= 40; ++k) instances.push_back({"P" + std::to_string(k), make_path(k), 0});

  double worst_p3 = 0;
  for (const auto& inst : instances) {
    const auto& g = inst.gg.graph;
    const auto ids = random_ids(g.node_count(), 2 * g.node_count(), rng);
    const auto r = run_full_pipeline(g, place_dispersed(g, ids));
    const auto coloring = oracle_coloring(g);
    const auto per_node = oracle_per_node_butterflies(g, coloring);
    const auto total = oracle_total_butterflies(g, coloring);
    bool counts = r.count.total == total;
    for (NodeIndex v = 0; v < g.node_count(); ++v) counts &= r.count.per_node.at(ids[v]) == per_node[v];
    a5.check(counts, inst.name + ": counts differ from the oracle");
    if (inst.closed_form) a5.check(r.count.total == *inst.closed_form, inst.name + ": closed form");
    const Round two_delta = 2ull * g.max_degree();
    a5.check(r.report.phase_rounds("phase1") <= two_delta, inst.name + ": phase1 over 2 Delta");
    a5.check(r.report.phase_rounds("phase2_a") <= two_delta, inst.name + ": phase2 (A) over 2 Delta");
    a5.check(r.report.phase_rounds("phase2_b") <= two_delta, inst.name + ": phase2 (B) over 2 Delta");
    const Round p3_bound = 8ull * inst.gg.parts.min_side() + 4;
    a5.check(r.report.phase_rounds("phase3") <= p3_bound, inst.name + ": phase3 over 8 min + 4");
    worst_p3 = std::max(worst_p3, static_cast<double>(r.report.phase_rounds("phase3")) / p3_bound);

    a6.check(r.sum_a == 2 * r.count.total && r.sum_b && *r.sum_b == 2 * r.count.total, inst.name + ": half-sum");

    if (g.node_count() <= 64) {
      a8_oracle.check(enumerate_butterflies(g, coloring) == total, inst.name + ": oracle paths disagree");
    }
  }
  a5.detail = fmt("%.0f instances, max phase3 / (8 min + 4) = %.2f", static_cast<double>(instances.size()), worst_p3);
  a6.detail = fmt("%.0f instances with both sides counted", static_cast<double>(a6.cases));
}

// A8: repeated runs give identical report and trace bytes, serial or parallel.
void determinism_criterion(Criterion& c) {
  const auto dir = std::filesystem::temp_directory_path() / "bfa_acceptance";
  std::filesystem::create_directories(dir);
  const std::vector<std::vector<std::string>> gens{
      {"random-bipartite", "15", "20", "0.2"}, {"complete-bipartite", "4", "6"}, {"path", "9"}, {"random-general", "30", "0.1"}};
  for (const auto& gen : gens) {
    for (const char* protocol : {"meeting-demo", "known-leader", "election", "butterfly-full"}) {
      if (gen[0] == "random-general" && std::string(protocol) == "butterfly-full") continue;
      std::string report[3], trace[3];
      for (int i = 0; i < 3; ++i) {
        ExperimentConfig ec;
        ec.gen = gen;
        ec.seed = 8;
        ec.protocol = protocol;
        ec.verify = true;
        ec.parallel = i == 2;
        ec.report_path = (dir / ("r" + std::to_string(i) + ".json")).string();
        ec.trace_path = (dir / ("t" + std::to_string(i) + ".jsonl")).string();
        const auto out = run_experiment(ec);
        c.check(out.exit_code == kExitOk, gen[0] + " " + protocol + ": " + out.message);
        report[i] = slurp(ec.report_path);
        trace[i] = slurp(ec.trace_path);
      }
      c.check(report[0] == report[1] && report[0] == report[2] && trace[0] == trace[1] && trace[0] == trace[2],
              gen[0] + " " + protocol + ": reruns differ");
    }
  }
  SweepConfig sweep;
  sweep.sizes = {10, 30};
  sweep.edge_probs = {0.1, 0.3};
  sweep.seeds = 2;
  const auto first = run_sweep(sweep);
  c.check(first == run_sweep(sweep), "sweep CSV differs between reruns");
}

void print(const Criterion& c) {
  std::printf("%s %s: %s", c.passed() ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
  std::printf(" [%llu checks, %llu failed]", static_cast<unsigned long long>(c.cases),
              static_cast<unsigned long long>(c.failures));
  if (!c.passed() && !c.first_failure.empty()) std::printf(" first failure: %s", c.first_failure.c_str());
  std::printf("\n");
  std::fflush(stdout);
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  std::vector<Criterion> results;
  try {
    results.push_back(meeting_criterion());
    print(results.back());
    results.push_back(known_leader_criterion());
    print(results.back());
    const auto elections = election_instances();
    results.push_back(election_criterion(elections));
    print(results.back());
    results.push_back(diameter_criterion(elections));
    print(results.back());

    Criterion a5{"A5 butterfly counting"}, a6{"A6 half-sum identity"}, a8{"A8 determinism and oracle self-check"};
    butterfly_criteria(a5, a6, a8);
    print(a5);
    print(a6);
    results.push_back(a5);
    results.push_back(a6);
    results.push_back(aggregate_criterion(elections));
    print(results.back());
    determinism_criterion(a8);
    a8.detail = "reruns byte-identical, pairwise oracle equals enumeration";
    print(a8);
    results.push_back(a8);
  } catch (const std::exception& e) {
    std::printf("FAIL acceptance aborted: %s\n", e.what());
    return 1;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool all = std::all_of(results.begin(), results.end(), [](const Criterion& c) { return c.passed(); });
  std::printf("%s: %zu criteria in %.1f s\n", all ? "ALL PASS" : "SOME FAILED", results.size(), secs);
  return all ? 0 : 1;
}
