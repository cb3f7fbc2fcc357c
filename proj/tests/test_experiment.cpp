#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "json.hpp"

#include "bfa/experiment.hpp"

using namespace bfa;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path scratch_dir() {
  auto dir = std::filesystem::temp_directory_path() / "bfa_experiment_test";
  std::filesystem::create_directories(dir);
  return dir;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("id assignment") {
  CHECK(assign_ids("seq", 4, 1) == std::vector<AgentId>{0, 1, 2, 3});
  const auto r = assign_ids("rand", 10, 5);
  CHECK(r.size() == 10);
  CHECK(std::set<AgentId>(r.begin(), r.end()).size() == 10);
  for (AgentId id : r) CHECK(id < 20);
  CHECK(r == assign_ids("rand", 10, 5));
  CHECK(assign_ids("list:4,2,9", 3, 0) == std::vector<AgentId>{4, 2, 9});
  CHECK_THROWS_AS(assign_ids("list:4,2", 3, 0), ConfigError);
  CHECK_THROWS_AS(assign_ids("list:4,4,1", 3, 0), ConfigError);
  CHECK_THROWS_AS(assign_ids("list:4,x,1", 3, 0), ConfigError);
  CHECK_THROWS_AS(assign_ids("shuffle", 3, 0), ConfigError);
}

TEST_CASE("graph sources") {
  ExperimentConfig c;
  CHECK_THROWS_AS(build_graph(c), ConfigError);
  c.gen = {"complete-bipartite", "2", "3"};
  CHECK(build_graph(c).graph.edge_count() == 6);
  c.graph_path = "x.txt";
  CHECK_THROWS_AS(build_graph(c), ConfigError);
  c.graph_path.clear();
  c.gen = {"petersen"};
  CHECK_THROWS_AS(build_graph(c), ConfigError);
  c.gen = {"random-bipartite", "3", "3"};
  CHECK_THROWS_AS(build_graph(c), ConfigError);
  c.gen = {"random-bipartite", "3", "3", "1.5"};
  CHECK_THROWS_AS(build_graph(c), ConfigError);
  c.gen = {"path", "abc"};
  CHECK_THROWS_AS(build_graph(c), ConfigError);
  c.gen = {"clique", "5"};
  CHECK_FALSE(build_graph(c).parts);
}

TEST_CASE("K33 butterfly run") {
  ExperimentConfig c;
  c.gen = {"complete-bipartite", "3", "3"};
  c.protocol = "butterfly-full";
  c.verify = true;
  const auto out = run_experiment(c);
  CHECK(out.exit_code == kExitOk);
  CHECK(out.report["results"]["total"] == 9);
  CHECK(out.report["verify"]["passed"] == true);
  for (const auto& b : out.bounds) CHECK_MESSAGE(b.holds(), b.quantity);
}

TEST_CASE("election run on a random graph") {
  ExperimentConfig c;
  c.gen = {"random-bipartite", "20", "30", "0.2"};
  c.seed = 42;
  c.protocol = "election";
  c.verify = true;
  const auto out = run_experiment(c);
  CHECK(out.exit_code == kExitOk);
  const auto ids = assign_ids("rand", 50, 42);
  CHECK(out.report["outputs"]["leader"] == *std::min_element(ids.begin(), ids.end()));
}

TEST_CASE("every protocol verifies on small graphs") {
  for (const char* protocol : {"meeting-demo", "known-leader", "election", "butterfly-full"}) {
    for (const std::vector<std::string>& gen :
         {std::vector<std::string>{"path", "6"}, {"complete-bipartite", "2", "5"}, {"random-bipartite", "6", "7", "0.3"}}) {
      ExperimentConfig c;
      c.gen = gen;
      c.protocol = protocol;
      c.verify = true;
      const auto out = run_experiment(c);
      CHECK_MESSAGE(out.exit_code == kExitOk, protocol, " ", out.message);
    }
  }
  ExperimentConfig general;
  general.gen = {"random-general", "15", "0.3"};
  general.protocol = "election";
  general.verify = true;
  CHECK(run_experiment(general).exit_code == kExitOk);
}

TEST_CASE("exit codes") {
  const auto dir = scratch_dir();
  const auto bad = dir / "bad.txt";
  std::ofstream(bad) << "2 2 4\n0 0 0 0\n0 1 1 0\n1 0 0 1\n1 1 0 1\n";
  ExperimentConfig file;
  file.graph_path = bad.string();
  const auto bad_out = run_experiment(file);
  CHECK(bad_out.exit_code == kExitConfig);
  CHECK(bad_out.message.find("port") != std::string::npos);

  ExperimentConfig limit;
  limit.gen = {"random-bipartite", "10", "10", "0.3"};
  limit.protocol = "election";
  limit.max_rounds = 5;
  CHECK(run_experiment(limit).exit_code == kExitRoundLimit);

  ExperimentConfig clique;
  clique.gen = {"clique", "4"};
  clique.protocol = "butterfly-full";
  CHECK(run_experiment(clique).exit_code == kExitConfig);

  ExperimentConfig unknown;
  unknown.gen = {"path", "4"};
  unknown.protocol = "gossip";
  CHECK(run_experiment(unknown).exit_code == kExitConfig);

  ExperimentConfig fault;
  fault.gen = {"random-bipartite", "8", "9", "0.4"};
  fault.ids = "seq";
  fault.verify = true;
  for (AgentId id = 0; id < 17; ++id) {
    fault.inject_fault = id;
    CHECK(run_experiment(fault).exit_code == kExitMismatch);
  }
  fault.inject_fault = 99;
  CHECK(run_experiment(fault).exit_code == kExitConfig);
}

TEST_CASE("reports and traces are byte-identical across reruns") {
  const auto dir = scratch_dir();
  ExperimentConfig c;
  c.gen = {"random-bipartite", "7", "9", "0.3"};
  c.seed = 5;
  c.verify = true;
  std::string reports[2], traces[2];
  for (int i = 0; i < 2; ++i) {
    c.report_path = (dir / ("report" + std::to_string(i) + ".json")).string();
    c.trace_path = (dir / ("trace" + std::to_string(i) + ".jsonl")).string();
    c.parallel = i == 1;
    REQUIRE(run_experiment(c).exit_code == kExitOk);
    reports[i] = slurp(c.report_path);
    traces[i] = slurp(c.trace_path);
  }
  CHECK(reports[0] == reports[1]);
  CHECK(traces[0] == traces[1]);

  const auto report = nlohmann::json::parse(reports[0]);
  CHECK(report["rounds_total"].get<std::uint64_t>() * 16 == count_lines(traces[0]));
  std::istringstream lines(traces[0]);
  std::string line;
  std::getline(lines, line);
  const auto event = nlohmann::json::parse(line);
  CHECK(event["round"] == 1);
  CHECK(event.contains("agent"));
  CHECK(event.contains("node"));
  CHECK((event["action"] == "stay" || event["action"] == "move"));
}

TEST_CASE("sweeps") {
  SweepConfig one;
  one.sizes = {12};
  const auto single = run_sweep(one);
  CHECK(count_lines(single) == 2);
  CHECK(single.rfind(sweep_csv_header() + "\n", 0) == 0);

  SweepConfig grid;
  grid.sizes = {8, 16};
  grid.edge_probs = {0.2, 0.5};
  grid.seeds = 2;
  grid.protocol = "election";
  const auto par = run_sweep(grid);
  grid.parallel = false;
  CHECK(run_sweep(grid) == par);
  CHECK(count_lines(par) == 9);
  const std::string header = sweep_csv_header();
  const auto columns = std::count(header.begin(), header.end(), ',');
  std::istringstream rows(par);
  std::string row;
  while (std::getline(rows, row)) {
    CHECK(std::count(row.begin(), row.end(), ',') == columns);
    if (row.rfind("instance", 0) != 0) CHECK(row.find(",ok,") != std::string::npos);
  }

  SweepConfig empty;
  CHECK_THROWS_AS(run_sweep(empty), ConfigError);
}

TEST_CASE("bound table formatting") {
  const std::string table = format_bound_table({{"phase1 rounds", 6, "2*Delta", 6}, {"x", 3, "1", 1}});
  CHECK(table.find("phase1 rounds") != std::string::npos);
  CHECK(table.find("yes") != std::string::npos);
  CHECK(table.find("NO") != std::string::npos);
}
