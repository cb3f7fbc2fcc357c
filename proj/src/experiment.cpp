#include "bfa/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "bfa/bounds.hpp"
#include "bfa/butterfly.hpp"
#include "bfa/oracle.hpp"
#include "bfa/rng.hpp"

namespace bfa {

namespace {

spdlog::logger& logger() {
  static const std::shared_ptr<spdlog::logger> instance = [] {
    auto l = spdlog::stderr_color_mt("butterfly_agents");
    l->set_pattern("[%l] %v");
    const char* env = std::getenv("BUTTERFLY_AGENTS_LOG");
    l->set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
    return l;
  }();
  return *instance;
}

template <typename T>
T parse_number(const std::string& text, const std::string& what) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) throw ConfigError("bad " + what + ": '" + text + "'");
  return value;
}

double parse_probability(const std::string& text) {
  const auto p = parse_number<double>(text, "edge probability");
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("edge probability must lie in [0, 1]");
  return p;
}

void expect_params(const std::vector<std::string>& gen, std::size_t count, const std::string& usage) {
  if (gen.size() != count + 1) throw ConfigError("usage: --gen " + usage);
}

std::string format_number(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return std::string(buf, ptr);
}

struct GraphFacts {
  std::size_t n = 0;
  std::size_t m = 0;
  std::uint32_t max_degree = 0;
  AgentId lambda = 0;
  std::uint32_t id_bits = 1;
  std::optional<std::vector<Side>> coloring;  // from the oracle, when bipartite
  std::size_t size_a = 0;
  std::size_t size_b = 0;

  std::size_t min_side() const { return std::min(size_a, size_b); }
};

GraphFacts graph_facts(const PortGraph& g, const Configuration& config) {
  GraphFacts f;
  f.n = g.node_count();
  f.m = g.edge_count();
  f.max_degree = g.max_degree();
  f.lambda = config.lambda;
  f.id_bits = config.id_bits();
  try {
    f.coloring = oracle_coloring(g);
    f.size_a = static_cast<std::size_t>(std::count(f.coloring->begin(), f.coloring->end(), Side::A));
    f.size_b = f.n - f.size_a;
  } catch (const NotBipartite&) {
  }
  return f;
}

NodeIndex index_of(const Configuration& config, AgentId id) {
  for (std::size_t k = 0; k < config.size(); ++k) {
    if (config.agents[k].id == id) return static_cast<NodeIndex>(k);
  }
  throw std::logic_error("no agent with id " + std::to_string(id));
}

class Checker {
 public:
  explicit Checker(ExperimentOutcome& out) : out_(out) {}

  template <typename A, typename B>
  void equal(const A& got, const B& want, const std::string& what) {
    if (got == want) return;
    std::ostringstream msg;
    msg << what << ": got " << got << ", expected " << want;
    out_.mismatches.push_back(msg.str());
  }
  void require(bool ok, const std::string& what) {
    if (!ok) out_.mismatches.push_back(what);
  }
  void bound(const std::string& quantity, double measured, const std::string& expression, double value) {
    out_.bounds.push_back({quantity, measured, expression, value});
  }

 private:
  ExperimentOutcome& out_;
};

void verify_tree(Checker& check, const PortGraph& g, const TreeEdgeSet& tree, NodeIndex root, const std::string& name) {
  const TreeReport t = check_spanning_tree(g, tree, root);
  check.require(t.is_spanning_tree, name + " is not a spanning tree rooted at the leader: " + t.problem);
}

// Partition, tree and aggregate checks shared by known-leader, election and butterfly-full.
void verify_construction(Checker& check, const PortGraph& g, const Configuration& config, const GraphFacts& facts,
                         NodeIndex leader, const TreeEdgeSet& tree, const std::vector<PartitionBit>& partitions,
                         const std::vector<GraphKnowledge>& knowledge) {
  verify_tree(check, g, tree, leader, "final tree");
  std::uint64_t degree_sum = 0;
  for (NodeIndex v = 0; v < g.node_count(); ++v) degree_sum += g.degree(v);
  for (std::size_t k = 0; k < config.size(); ++k) {
    const std::string who = "agent " + std::to_string(config.agents[k].id);
    check.equal(knowledge[k].n, facts.n, who + " n");
    check.equal(knowledge[k].max_degree, facts.max_degree, who + " max degree");
    check.equal(knowledge[k].degree_sum, degree_sum, who + " degree sum");
    if (!facts.coloring) continue;
    const bool same = (*facts.coloring)[k] == (*facts.coloring)[leader];
    check.require(partitions[k] == (same ? PartitionBit::Zero : PartitionBit::One), who + " partition");
    const std::size_t leader_side = (*facts.coloring)[leader] == Side::A ? facts.size_a : facts.size_b;
    check.equal(knowledge[k].size0, leader_side, who + " leader-side size");
    check.equal(knowledge[k].size1, facts.n - leader_side, who + " other-side size");
  }
}

void election_bounds(Checker& check, const GraphFacts& facts, const ElectionResult& e, const PortGraph& g,
                     const Configuration& config) {
  const double nl = static_cast<double>(facts.n) * facts.id_bits;
  check.bound("election rounds", static_cast<double>(e.report.phase_rounds("election")),
              "c*n*L, c=" + format_number(kElectionRoundConstant), kElectionRoundConstant * nl);
  check.bound("election state bits", static_cast<double>(e.report.max_peak_state_bits()),
              "c'*L, c'=" + format_number(kElectionStateConstant), kElectionStateConstant * facts.id_bits);
  if (facts.coloring) {
    const TreeReport t = check_spanning_tree(g, e.election_tree, index_of(config, e.leader));
    check.bound("election tree diameter", t.diameter, "2*min(|A|,|B|)", 2.0 * facts.min_side());
    check.bound("partition assignment rounds", static_cast<double>(e.assignment_rounds), "4n", 4.0 * facts.n);
  }
}

void verify_election(Checker& check, const PortGraph& g, const Configuration& config, const GraphFacts& facts,
                     const ElectionResult& e) {
  AgentId min_id = config.agents.front().id;
  for (const auto& s : config.agents) min_id = std::min(min_id, s.id);
  check.equal(e.leader, min_id, "leader");
  for (std::size_t k = 0; k < config.size(); ++k) {
    check.equal(e.treelabels[k], min_id, "agent " + std::to_string(config.agents[k].id) + " treelabel");
  }
  const NodeIndex leader = index_of(config, min_id);
  verify_tree(check, g, e.election_tree, leader, "election tree");
  verify_construction(check, g, config, facts, leader, e.tree, e.partitions, e.knowledge);
}

void run_meeting_demo(const PortGraph& g, const Configuration& config, const GraphFacts& facts, const RunOptions& opts,
                      Checker& check, RunReport& report) {
  std::vector<OptPort> targets;
  for (std::size_t k = 0; k < config.size(); ++k) {
    targets.push_back(g.degree(config.homes[k]) > 0 ? OptPort(0) : std::nullopt);
  }
  const MeetingDemoResult r = run_meeting_window(g, config, targets, opts);
  report.add_phase("meeting", r.run);
  Round latest = 0;
  auto& met = report.outputs["met_as_visitor"] = nlohmann::ordered_json::object();
  for (const auto& a : r.agents) {
    if (!a.target) continue;
    check.require(a.met_as_visitor.has_value(), "agent " + std::to_string(a.id) + " never met its port-0 neighbor");
    if (!a.met_as_visitor) continue;
    met[std::to_string(a.id)] = *a.met_as_visitor;
    latest = std::max(latest, *a.met_as_visitor);
  }
  check.bound("first meeting round", static_cast<double>(latest), "4L", 4.0 * facts.id_bits);
}

void run_known_leader(const PortGraph& g, const Configuration& config, const GraphFacts& facts, const RunOptions& opts,
                      Checker& check, RunReport& report) {
  AgentId min_id = config.agents.front().id;
  for (const auto& s : config.agents) min_id = std::min(min_id, s.id);
  KnownLeaderResult r = known_leader_tree(g, config, min_id, opts);
  report.append(r.report);
  verify_construction(check, g, config, facts, index_of(config, min_id), r.tree, r.partitions, r.knowledge);
  if (facts.coloring) {
    check.bound("partition assignment rounds", static_cast<double>(r.assignment_rounds), "4n", 4.0 * facts.n);
  }
}

void run_election(const PortGraph& g, const Configuration& config, const GraphFacts& facts, const RunOptions& opts,
                  Checker& check, RunReport& report) {
  ElectionResult e = elect_leader_and_tree(g, config, opts);
  report.append(e.report);
  verify_election(check, g, config, facts, e);
  election_bounds(check, facts, e, g, config);
}

nlohmann::ordered_json run_butterfly(const PortGraph& g, const Configuration& config, const GraphFacts& facts,
                                     const RunOptions& opts, std::optional<AgentId> fault, Checker& check,
                                     RunReport& report) {
  if (!facts.coloring) throw ConfigError("butterfly counting needs a bipartite graph");
  PipelineOptions p;
  p.run = opts;
  p.fault_agent = fault;
  PipelineResult r = run_full_pipeline(g, config, p);
  report.append(r.report);
  verify_election(check, g, config, facts, r.election);
  election_bounds(check, facts, r.election, g, config);

  const OracleResult oracle = run_oracle(g);
  check.equal(r.count.total, oracle.total_butterflies, "total");
  for (std::size_t k = 0; k < config.size(); ++k) {
    const AgentId id = config.agents[k].id;
    const auto it = r.count.per_node.find(id);
    check.require(it != r.count.per_node.end(), "agent " + std::to_string(id) + " has no count");
    if (it != r.count.per_node.end()) check.equal(it->second, oracle.per_node_butterflies[k], "agent " + std::to_string(id) + " count");
    check.equal(r.known_total[k], r.count.total, "agent " + std::to_string(id) + " known total");
  }
  check.equal(r.sum_a, 2 * r.count.total, "leader-side sum");
  if (r.sum_b) check.equal(*r.sum_b, 2 * r.count.total, "other-side sum");

  const double two_delta = 2.0 * facts.max_degree;
  check.bound("phase1 rounds", static_cast<double>(report.phase_rounds("phase1")), "2*Delta", two_delta);
  check.bound("phase2_a rounds", static_cast<double>(report.phase_rounds("phase2_a")), "2*Delta", two_delta);
  check.bound("phase2_b rounds", static_cast<double>(report.phase_rounds("phase2_b")), "2*Delta", two_delta);
  check.bound("phase3 rounds", static_cast<double>(report.phase_rounds("phase3")), "8*min(|A|,|B|)+4",
              8.0 * facts.min_side() + 4);
  return results_json(r);
}

nlohmann::ordered_json bounds_json(const std::vector<BoundCheck>& bounds) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& b : bounds) {
    arr.push_back({{"quantity", b.quantity},
                   {"measured", b.measured},
                   {"expression", b.expression},
                   {"bound", b.bound},
                   {"holds", b.holds()}});
  }
  return arr;
}

}  // namespace

LoadedGraph build_graph(const ExperimentConfig& config) {
  const bool has_gen = !config.gen.empty();
  const bool has_file = !config.graph_path.empty();
  if (has_gen == has_file) throw ConfigError("give exactly one of --gen and --graph");
  LoadedGraph out;
  if (has_file) {
    GeneratedGraph g = load_graph_file(config.graph_path);
    out.graph = std::move(g.graph);
    out.parts = std::move(g.parts);
    out.description = "file " + config.graph_path;
    return out;
  }
  const auto& gen = config.gen;
  const std::string& name = gen[0];
  auto count = [&](std::size_t i, const char* what) { return parse_number<std::uint32_t>(gen[i], what); };
  std::ostringstream desc;
  for (std::size_t i = 0; i < gen.size(); ++i) desc << (i ? " " : "") << gen[i];
  out.description = desc.str();
  if (name == "complete-bipartite") {
    expect_params(gen, 2, "complete-bipartite <a> <b>");
    GeneratedGraph g = make_complete_bipartite(count(1, "side size"), count(2, "side size"));
    out.graph = std::move(g.graph);
    out.parts = std::move(g.parts);
  } else if (name == "random-bipartite") {
    expect_params(gen, 3, "random-bipartite <a> <b> <p>");
    GeneratedGraph g =
        make_random_connected_bipartite(count(1, "side size"), count(2, "side size"), parse_probability(gen[3]), config.seed);
    out.graph = std::move(g.graph);
    out.parts = std::move(g.parts);
  } else if (name == "path") {
    expect_params(gen, 1, "path <k>");
    GeneratedGraph g = make_path(count(1, "path length"));
    out.graph = std::move(g.graph);
    out.parts = std::move(g.parts);
  } else if (name == "clique") {
    expect_params(gen, 1, "clique <k>");
    out.graph = make_clique(count(1, "clique size"));
  } else if (name == "random-general") {
    expect_params(gen, 2, "random-general <n> <p>");
    out.graph = make_random_connected_graph(count(1, "node count"), parse_probability(gen[2]), config.seed);
  } else {
    throw ConfigError("unknown generator '" + name +
                      "' (complete-bipartite, random-bipartite, path, clique, random-general)");
  }
  if (out.graph.node_count() == 0) throw ConfigError("generated graph is empty");
  return out;
}

std::vector<AgentId> assign_ids(const std::string& mode, std::size_t n, std::uint64_t seed) {
  std::vector<AgentId> ids;
  if (mode == "seq") {
    for (std::size_t i = 0; i < n; ++i) ids.push_back(static_cast<AgentId>(i));
  } else if (mode == "rand") {
    std::vector<AgentId> pool(2 * n);
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = static_cast<AgentId>(i);
    Rng rng(seed);
    rng.shuffle(pool);
    ids.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n));
  } else if (mode.rfind("list:", 0) == 0) {
    std::stringstream in(mode.substr(5));
    std::string item;
    while (std::getline(in, item, ',')) ids.push_back(parse_number<AgentId>(item, "id"));
    if (ids.size() != n) {
      throw ConfigError("id list has " + std::to_string(ids.size()) + " entries for " + std::to_string(n) + " nodes");
    }
    auto sorted = ids;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw ConfigError("ids must be distinct");
  } else {
    throw ConfigError("unknown id assignment '" + mode + "' (seq, rand, list:...)");
  }
  return ids;
}

std::string format_bound_table(const std::vector<BoundCheck>& bounds) {
  std::ostringstream out;
  std::size_t width = 8;
  for (const auto& b : bounds) width = std::max(width, b.quantity.size());
  char line[256];
  std::snprintf(line, sizeof line, "%-*s %10s  %-22s %10s  %s\n", static_cast<int>(width), "quantity", "measured",
                "bound", "value", "ok");
  out << line;
  for (const auto& b : bounds) {
    std::snprintf(line, sizeof line, "%-*s %10s  %-22s %10s  %s\n", static_cast<int>(width), b.quantity.c_str(),
                  format_number(b.measured).c_str(), b.expression.c_str(), format_number(b.bound).c_str(),
                  b.holds() ? "yes" : "NO");
    out << line;
  }
  return out.str();
}

ExperimentOutcome run_experiment(const ExperimentConfig& config) {
  ExperimentOutcome out;
  Checker check(out);
  RunReport report;
  nlohmann::ordered_json results;
  try {
    const LoadedGraph lg = build_graph(config);
    const PortGraph& g = lg.graph;
    const auto ids = assign_ids(config.ids, g.node_count(), config.seed);
    if (config.inject_fault && config.protocol != "butterfly-full") {
      throw ConfigError("--inject-fault applies to butterfly-full only");
    }
    Configuration placed;
    try {
      placed = place_dispersed(g, ids);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (config.inject_fault && std::find(ids.begin(), ids.end(), *config.inject_fault) == ids.end()) {
      throw ConfigError("--inject-fault names no agent");
    }
    const GraphFacts facts = graph_facts(g, placed);
    logger().info("graph {}: n={} m={} Delta={} lambda={} L={}", lg.description, facts.n, facts.m, facts.max_degree,
                 facts.lambda, facts.id_bits);

    std::unique_ptr<std::ofstream> trace_file;
    std::unique_ptr<JsonlTraceWriter> trace;
    if (!config.trace_path.empty()) {
      trace_file = std::make_unique<std::ofstream>(config.trace_path, std::ios::binary);
      if (!*trace_file) throw ConfigError("cannot write trace file " + config.trace_path);
      trace = std::make_unique<JsonlTraceWriter>(*trace_file);
    }
    RunOptions opts;
    opts.max_rounds = config.max_rounds;
    opts.trace = trace.get();
    opts.parallel = config.parallel;

    out.report["protocol"] = config.protocol;
    auto& graph = out.report["graph"];
    graph["source"] = lg.description;
    graph["n"] = facts.n;
    graph["m"] = facts.m;
    graph["max_degree"] = facts.max_degree;
    graph["lambda"] = facts.lambda;
    graph["id_bits"] = facts.id_bits;
    graph["bipartite"] = facts.coloring.has_value();
    if (facts.coloring) {
      graph["size_a"] = facts.size_a;
      graph["size_b"] = facts.size_b;
    }

    if (config.protocol == "meeting-demo") {
      run_meeting_demo(g, placed, facts, opts, check, report);
    } else if (config.protocol == "known-leader") {
      run_known_leader(g, placed, facts, opts, check, report);
    } else if (config.protocol == "election") {
      run_election(g, placed, facts, opts, check, report);
    } else if (config.protocol == "butterfly-full") {
      results = run_butterfly(g, placed, facts, opts, config.inject_fault, check, report);
    } else {
      throw ConfigError("unknown protocol '" + config.protocol +
                        "' (meeting-demo, known-leader, election, butterfly-full)");
    }
    if (!config.verify) out.mismatches.clear();
    for (const auto& phase : report.rounds_per_phase) logger().debug("phase {}: {} rounds", phase.first, phase.second);
    for (const auto& m : out.mismatches) logger().warn("mismatch: {}", m);
    out.exit_code = out.mismatches.empty() ? kExitOk : kExitMismatch;
    std::ostringstream summary;
    summary << config.protocol << ": rounds " << report.rounds_total;
    if (report.outputs.contains("leader")) summary << ", leader " << report.outputs["leader"].dump();
    if (report.outputs.contains("total")) summary << ", total " << report.outputs["total"].dump();
    if (config.verify) summary << (out.mismatches.empty() ? ", verified" : ", VERIFICATION FAILED");
    out.message = summary.str();
  } catch (const RoundLimitExceeded& e) {
    out.exit_code = kExitRoundLimit;
    out.message = std::string("round limit exceeded: ") + e.what();
  } catch (const ConfigError& e) {
    out.exit_code = kExitConfig;
    out.message = e.what();
  } catch (const GraphFormatError& e) {
    out.exit_code = kExitConfig;
    out.message = e.what();
  } catch (const OddSum& e) {
    out.exit_code = kExitMismatch;
    out.message = std::string("counting failed: ") + e.what();
  } catch (const std::exception& e) {
    out.exit_code = kExitMismatch;
    out.message = std::string("protocol failure: ") + e.what();
  }

  if (out.exit_code != kExitConfig) {
    const nlohmann::ordered_json rounds = report.to_json();
    for (const auto& [key, value] : rounds.items()) out.report[key] = value;
    if (!results.is_null()) out.report["results"] = results;
    out.report["bounds"] = bounds_json(out.bounds);
    out.report["verify"] = {{"enabled", config.verify},
                            {"passed", out.exit_code == kExitOk},
                            {"mismatches", out.mismatches}};
    out.report["exit_code"] = out.exit_code;
  }
  if (!config.report_path.empty() && !out.report.is_null()) {
    std::ofstream file(config.report_path, std::ios::binary);
    if (!file) {
      out.exit_code = kExitConfig;
      out.message = "cannot write report file " + config.report_path;
    } else {
      file << out.report.dump(2) << "\n";
    }
  }
  return out;
}

std::string sweep_csv_header() {
  return "instance,family,n,m,max_degree,min_side,id_bits,lambda,edge_prob,seed,protocol,status,rounds_total,"
         "election,partition,downcast,phase1,phase2_a,phase2_b,phase3,meeting,peak_bits,peak_state_bits";
}

std::string run_sweep(const SweepConfig& config) {
  if (config.sizes.empty() || config.edge_probs.empty() || config.seeds == 0) {
    throw ConfigError("sweep ranges must be non-empty");
  }
  struct Instance {
    std::uint32_t n;
    double p;
    std::uint64_t seed;
  };
  std::vector<Instance> instances;
  for (std::uint32_t n : config.sizes) {
    for (double p : config.edge_probs) {
      for (std::uint32_t s = 0; s < config.seeds; ++s) instances.push_back({n, p, config.base_seed + s});
    }
  }
  std::vector<std::string> rows(instances.size());
#pragma omp parallel for schedule(dynamic) if (config.parallel)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(instances.size()); ++i) {
    const Instance& inst = instances[i];
    ExperimentConfig ec;
    ec.ids = config.ids;
    ec.seed = inst.seed;
    ec.protocol = config.protocol;
    ec.verify = true;
    const std::string a = std::to_string(inst.n / 2), b = std::to_string(inst.n - inst.n / 2);
    if (config.family == "random-bipartite") {
      ec.gen = {config.family, a, b, format_number(inst.p)};
    } else if (config.family == "random-general") {
      ec.gen = {config.family, std::to_string(inst.n), format_number(inst.p)};
    } else if (config.family == "complete-bipartite") {
      ec.gen = {config.family, a, b};
    } else {
      ec.gen = {config.family, std::to_string(inst.n)};
    }
    const ExperimentOutcome r = run_experiment(ec);
    const auto& rep = r.report;
    const char* status = r.exit_code == kExitOk ? "ok"
                         : r.exit_code == kExitMismatch ? "mismatch"
                         : r.exit_code == kExitRoundLimit ? "round_limit"
                                                           : "config_error";
    auto field = [&](const nlohmann::ordered_json& obj, const char* key) -> std::string {
      return obj.is_object() && obj.contains(key) ? obj[key].dump() : "";
    };
    const nlohmann::ordered_json graph = rep.value("graph", nlohmann::ordered_json::object());
    const nlohmann::ordered_json phases = rep.value("rounds_per_phase", nlohmann::ordered_json::object());
    std::string min_side;
    if (graph.contains("size_a")) {
      min_side = std::to_string(std::min(graph["size_a"].get<std::uint64_t>(), graph["size_b"].get<std::uint64_t>()));
    }
    auto max_of = [&](const char* key) -> std::string {
      if (!rep.contains(key)) return "";
      std::uint64_t best = 0;
      for (const auto& [id, bits] : rep[key].items()) best = std::max(best, bits.get<std::uint64_t>());
      return std::to_string(best);
    };
    std::ostringstream row;
    row << i << ',' << config.family << ',' << field(graph, "n") << ',' << field(graph, "m") << ','
        << field(graph, "max_degree") << ',' << min_side << ',' << field(graph, "id_bits") << ','
        << field(graph, "lambda") << ',' << format_number(inst.p) << ',' << inst.seed << ',' << config.protocol << ','
        << status << ',' << field(rep, "rounds_total");
    for (const char* phase : {"election", "partition", "downcast", "phase1", "phase2_a", "phase2_b", "phase3", "meeting"}) {
      row << ',' << field(phases, phase);
    }
    row << ',' << max_of("peak_memory_bits") << ',' << max_of("peak_state_bits");
    rows[i] = row.str();
  }
  std::string csv = sweep_csv_header() + "\n";
  for (const auto& row : rows) csv += row + "\n";
  return csv;
}

void configure_logging() { logger().debug("logging at level {}", spdlog::level::to_string_view(logger().level())); }

}  // namespace bfa
