#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "dca/error.hpp"
#include "dca/harness.hpp"
#include "dca/trace.hpp"
#include "published_data.hpp"

using namespace dca;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string &name) {
  auto p = fs::temp_directory_path() / ("dca_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

class CountingOracle final : public Oracle {
 public:
  explicit CountingOracle(Landscape l) : inner_(std::move(l)) {}
  FitnessEstimate evaluate(const Assignment &x, std::uint64_t n, std::uint64_t seed) override {
    ++calls;
    return inner_.evaluate(x, n, seed);
  }
  std::string identity() const override { return "counting"; }
  int calls = 0;

 private:
  ExactOracle inner_;
};

const char *kSyntheticConfig = R"({
  "initial": [11, 2, 3, 10, 9, 6, 4, 5, 7, 8],
  "seed": 7,
  "oracle": {"kind": "synthetic",
             "landscape": {"kind": "target", "target": [5, 4, 2, 3, 7, 6, 8, 10, 11, 9], "sigma": 1.9}},
  "phase1": {"games": 300, "baseline_games": 600},
  "phase2": {"steps": 10, "games_hi": 2000}
})";

}  // namespace

TEST_CASE("run config parsing") {
  const auto cfg = parse_run_config(slurp(testdata::kConfigs / "published_replay.json"),
                                    testdata::kConfigs);
  CHECK(cfg.initial == Assignment(testdata::kX0));
  CHECK(cfg.seed == 2019u);
  CHECK(cfg.phase1.games == 1000);
  CHECK(cfg.phase1.baseline_games == 2000);
  CHECK(cfg.phase1.scope == InductionScope::flanking);
  CHECK(cfg.phase2.games_hi == 16000);
  CHECK(cfg.phase2.script.size() == 10);

  const auto d = parse_run_config(R"({"initial":[1,2],"oracle":{"kind":"exact","landscape":{"target":[1,2]}},
                                      "phase1":{"games":50}})",
                                  ".");
  CHECK(d.phase2.games_hi == 800);
  CHECK_FALSE(d.seed);
  CHECK_THROWS_AS(validate(d, RunMode::both), Error);

  for (const char *bad : {
           R"({"oracle":{"kind":"exact"},"colour":1})",
           R"({"initial":[1,2]})",
           R"({"oracle":{},"phase1":{"gmaes":5}})",
           R"({"oracle":{},"phase2":{"temp":5}})",
           R"({"oracle":{},"phase1":{"induction_scope":"wide"}})",
           R"({"oracle":{},"seed":-1})",
           R"({"oracle":{},"phase1":{"games":"many"}})",
           R"({"oracle":{},"phase2":{"script_moves":"nope.moves"}})",
           "[]",
           "{",
       }) {
    CAPTURE(std::string(bad));
    CHECK_THROWS_AS(parse_run_config(bad, "."), Error);
  }
  try {
    parse_run_config(R"({"oracle":{},"colour":1})", ".");
  } catch (const Error &e) {
    CHECK(e.code() == Errc::config);
    CHECK(std::string(e.what()).find("colour") != std::string::npos);
  }
}

TEST_CASE("invalid configs are rejected before any evaluation") {
  Landscape l;
  l.target = {2, 1, 3, 4};
  RunConfig cfg;
  cfg.initial = Assignment({1, 2, 3, 4});
  cfg.oracle_spec = "{}";
  cfg.seed = 1;
  for (auto mutate : std::vector<std::function<void(RunConfig &)>>{
           [](RunConfig &c) { c.phase2.schedule.dt = 0.02; },
           [](RunConfig &c) { c.phase2.schedule.steps = 0; },
           [](RunConfig &c) { c.phase1.games = 0; },
           [](RunConfig &c) { c.phase2.games_hi = 0; },
           [](RunConfig &c) { c.phase2.proposer.pool_size = 0; },
           [](RunConfig &c) { c.phase1.tau = -1; },
           [](RunConfig &c) { c.seed.reset(); },
           [](RunConfig &c) { c.initial.reset(); },
       }) {
    auto bad = cfg;
    mutate(bad);
    auto oracle = std::make_shared<CountingOracle>(l);
    CHECK_THROWS_AS(run_experiment(bad, RunMode::both, oracle), Error);
    CHECK(oracle->calls == 0);
  }
  auto p2 = cfg;
  CHECK_THROWS_AS(run_experiment(p2, RunMode::phase2_only, std::make_shared<CountingOracle>(l)),
                  Error);
}

TEST_CASE("full published replay through the runner") {
  const auto dir = scratch("published");
  auto cfg = parse_run_config(slurp(testdata::kConfigs / "published_replay.json"), testdata::kConfigs);
  cfg.out_dir = dir;
  const auto s = run_experiment(cfg);
  CHECK(s.best == Assignment(testdata::kX44));
  CHECK(s.best_estimate.mean == -2.95471);
  CHECK(s.graph.edges().size() == 12);
  CHECK(s.graph.violations(s.best) == 0);
  CHECK(s.graph.violations(Assignment(testdata::kX34)) == 2);
  REQUIRE(s.phase1);
  REQUIRE(s.phase2);
  CHECK(s.phase1->tests == 36);
  CHECK(s.phase2->tests == 11);
  CHECK(s.evaluations == 47);
  CHECK(s.games == 2000 + 35 * 1000 + 11 * 16000);

  for (const char *f : {"trace.jsonl", "trace.csv", "constraints.edges", "dag.dot", "summary.json"})
    CHECK(fs::exists(dir / f));
  const auto back = read_trace((dir / "trace.jsonl").string());
  CHECK(back == s.trace);
  std::size_t csv_lines = 0;
  std::istringstream csv(slurp(dir / "trace.csv"));
  for (std::string line; std::getline(csv, line);) ++csv_lines;
  CHECK(csv_lines == s.trace.size() + 1);
  CHECK(parse_edge_list(slurp(dir / "constraints.edges")).edges().size() == 12);

  const auto from_trace = graph_from_trace(back);
  std::set<std::pair<int, int>> edges;
  for (const auto &e : from_trace.edges()) edges.insert({e.before, e.after});
  CHECK(edges == std::set<std::pair<int, int>>(testdata::kG12.begin(), testdata::kG12.end()));
  fs::remove_all(dir);
}

TEST_CASE("identical configs give byte-identical traces") {
  const auto a = scratch("det_a"), b = scratch("det_b");
  auto cfg = parse_run_config(kSyntheticConfig, ".");
  cfg.out_dir = a;
  const auto ra = run_experiment(cfg);
  cfg.out_dir = b;
  const auto rb = run_experiment(cfg);
  CHECK(slurp(a / "trace.jsonl") == slurp(b / "trace.jsonl"));
  CHECK(slurp(a / "trace.csv") == slurp(b / "trace.csv"));
  CHECK(slurp(a / "dag.dot") == slurp(b / "dag.dot"));
  CHECK(ra.best == rb.best);
  CHECK_FALSE(slurp(a / "trace.jsonl").empty());

  cfg.seed = 8;
  cfg.out_dir.clear();
  const auto rc = run_experiment(cfg);
  CHECK(rc.trace != ra.trace);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("phase modes") {
  auto cfg = parse_run_config(kSyntheticConfig, ".");
  const auto p1 = run_experiment(cfg, RunMode::phase1_only);
  CHECK(p1.phase1);
  CHECK_FALSE(p1.phase2);
  CHECK(p1.best == p1.phase1->best);

  cfg.initial.reset();
  cfg.start = p1.best;
  cfg.graph = p1.graph;
  const auto p2 = run_experiment(cfg, RunMode::phase2_only);
  CHECK_FALSE(p2.phase1);
  REQUIRE(p2.phase2);
  CHECK(p2.trace.front().kind == RecordKind::reeval);
  CHECK(p2.trace.front().test_id == 0);
  CHECK(p2.graph.edges().size() == p1.graph.edges().size());
}

TEST_CASE("exact oracle, n=4: pipeline matches brute force") {
  Landscape l;
  l.target = {3, 1, 4, 2};
  std::vector<int> start{1, 2, 3, 4};
  int matched = 0, total = 0;
  do {
    RunConfig cfg;
    cfg.initial = Assignment(start);
    cfg.oracle_spec = R"({"kind":"exact","landscape":{"target":[3,1,4,2]}})";
    cfg.seed = 3;
    const auto s = run_experiment(cfg);
    ++total;
    if (s.best == brute_force_optimum(l).best) ++matched;
  } while (std::next_permutation(start.begin(), start.end()));
  CHECK(matched == total);
}

TEST_CASE("brute force") {
  Landscape l;
  l.target = {3, 1, 2};
  auto r = brute_force_optimum(l);
  CHECK(r.best == Assignment({3, 1, 2}));
  CHECK(r.mean == 0.0);
  CHECK(r.enumerated == 6);

  Landscape eight;
  eight.target = {8, 7, 6, 5, 4, 3, 2, 1};
  ConstraintGraph chain;
  chain.try_add({1, 2, {}});
  chain.try_add({2, 3, {}});
  chain.try_add({3, 4, {}});
  r = brute_force_optimum(eight, &chain);
  CHECK(r.enumerated == 40320 / 24);
  CHECK(brute_force_optimum(eight).enumerated == 40320);
  CHECK(chain.satisfies(r.best));
  // Independent check of the constrained optimum.
  std::vector<int> v{1, 2, 3, 4, 5, 6, 7, 8};
  double best = -1e300;
  std::uint64_t feasible = 0;
  do {
    const Assignment x(v);
    if (!chain.satisfies(x)) continue;
    ++feasible;
    best = std::max(best, eight.true_fitness(x));
  } while (std::next_permutation(v.begin(), v.end()));
  CHECK(feasible == r.enumerated);
  CHECK(r.mean == best);

  ConstraintGraph empty;
  const auto a = brute_force_optimum(eight, &empty);
  const auto b = brute_force_optimum(eight);
  CHECK(a.best == b.best);
  CHECK(a.enumerated == b.enumerated);

  // All-zero weights: every assignment ties, the smallest wins.
  Landscape flat;
  flat.target = {2, 3, 1};
  for (int e : flat.target) flat.weights[e] = 0.0;
  CHECK(brute_force_optimum(flat).best == Assignment({1, 2, 3}));

  Landscape ten;
  ten.target = testdata::kX44;
  try {
    brute_force_optimum(ten);
    FAIL("expected throw");
  } catch (const Error &e) {
    CHECK(e.code() == Errc::too_large);
  }
}

TEST_CASE("replay verification") {
  const auto report = replay_verify(testdata::kFixtures);
  CHECK(report.constraints_match);
  CHECK(report.values_match);
  CHECK(report.all_match());
  REQUIRE(report.discrepancies.size() == 1);
  CHECK(report.discrepancies[0].rfind("note: test 41", 0) == 0);
  const auto json = report.to_json();
  CHECK(json.find("\"constraints_match\": true") != std::string::npos);

  const auto t3 = load_replay_fixture(testdata::kFixtures / "table3.replay");
  const auto moves = parse_script_moves(slurp(testdata::kFixtures / "table3.moves"));
  auto t12 = load_replay_fixture(testdata::kFixtures / "table1_2.replay");
  // Test 5 pulled up to within its own se of test 3: rho(2)<rho(3) drops below the gate.
  REQUIRE(t12[5].assignment == Assignment::parse("3 2 10 11 9 6 4 5 7 8"));
  t12[5].estimate.mean += 0.02;
  const auto perturbed = replay_verify(t12, t3, moves);
  CHECK_FALSE(perturbed.constraints_match);
  CHECK(std::find(perturbed.discrepancies.begin(), perturbed.discrepancies.end(),
                  "missing constraint rho(2)<rho(3)") != perturbed.discrepancies.end());

  // A +0.2 shift makes test 5 the sweep's best and walks off the fixture.
  auto far = load_replay_fixture(testdata::kFixtures / "table1_2.replay");
  far[5].estimate.mean += 0.2;
  try {
    replay_verify(far, t3, moves);
    FAIL("expected throw");
  } catch (const Error &e) {
    CHECK(e.code() == Errc::replay_miss);
  }

  CHECK_THROWS_AS(replay_verify({}, t3, moves), Error);
  const auto empty = scratch("empty_fixtures");
  CHECK_THROWS_AS(replay_verify(empty), Error);
  for (const char *f : {"table1_2.replay", "table3.replay", "table3.moves"})
    fs::copy_file(testdata::kFixtures / f, empty / f);
  std::ofstream(empty / "table1_2.replay", std::ios::trunc) << "# dca-replay v1\n";
  CHECK_THROWS_AS(replay_verify(empty), Error);
  fs::remove_all(empty);
}

TEST_CASE("DAG export") {
  const auto dir = scratch("dag");
  const auto g = testdata::g12();
  export_dag(g, dir / "a.dot");
  export_dag(g, dir / "b.dot");
  const auto dot = slurp(dir / "a.dot");
  CHECK(dot == slurp(dir / "b.dot"));
  CHECK(dot.find("  10 -> 11;\n") != std::string::npos);
  CHECK(dot.find("  5 -> 4;\n") != std::string::npos);
  std::size_t edges = 0;
  for (std::size_t at = dot.find("->"); at != std::string::npos; at = dot.find("->", at + 1)) ++edges;
  CHECK(edges == 10);

  ConstraintGraph nodes_only;
  nodes_only.add_nodes(std::vector<int>{2, 1});
  export_dag(nodes_only, dir / "empty.dot");
  CHECK(slurp(dir / "empty.dot") == "digraph constraints {\n  1;\n  2;\n}\n");
  CHECK_THROWS_AS(export_dag(g, dir / "missing" / "x.dot"), Error);
  fs::remove_all(dir);
}

TEST_CASE("trace records round-trip") {
  TraceRecord sweep;
  sweep.kind = RecordKind::sweep;
  sweep.test_id = 3;
  sweep.assignment = {2, 3, 10, 11};
  sweep.mean = -3.89289;
  sweep.se = 0.061798;
  sweep.n_games = 1000;
  sweep.element = 11;
  sweep.best_rank = 4;
  sweep.inductions = {{10, 11, 2, 3, 0.1, 0.06, "added"},
                      {3, 4, 17, 18, 0.02878, 0.059761, "not-induced"}};
  TraceRecord step;
  step.kind = RecordKind::step;
  step.phase = 2;
  step.test_id = 39;
  step.assignment = {2, 5, 3, 4};
  step.mean = -3.05799;
  step.se = 0.013767;
  step.n_games = 16000;
  step.marker = Marker::accepted_worse;
  step.temperature = 0.07;
  step.delta = 0.00673;
  step.probability = 0.9083336;
  step.decision = Decision::accepted_worse;
  step.violations = 0;
  step.cached = true;
  TraceRecord plain;
  plain.mean = 1.0 / 3.0;
  plain.assignment = {1, 2};
  for (const auto &r : {sweep, step, plain}) {
    const auto line = to_json_line(r);
    CHECK(line.find('\n') == std::string::npos);
    CHECK(parse_trace_line(line) == r);
    CHECK(to_json_line(parse_trace_line(line)) == line);
    // Same number of CSV columns as the header.
    const auto row = to_csv_row(r);
    std::size_t commas = 0, header_commas = 0;
    bool quoted = false;
    for (char c : row) {
      if (c == '"') quoted = !quoted;
      if (c == ',' && !quoted) ++commas;
    }
    for (char c : csv_header())
      if (c == ',') ++header_commas;
    CHECK(commas == header_commas);
  }
  CHECK(to_json_line(plain).rfind(R"({"kind":"test","test_id":0,"phase":1,)", 0) == 0);
  CHECK_THROWS_AS(parse_trace_line("{}"), Error);
  CHECK_THROWS_AS(parse_trace_line(R"({"kind":"nap"})"), Error);
  CHECK_THROWS_AS(parse_trace_line("not json"), Error);
  CHECK_THROWS_AS(read_trace("/nonexistent/trace.jsonl"), Error);
}

TEST_CASE("trace writer appends and flushes per record") {
  const auto dir = scratch("writer");
  const auto path = (dir / "t.jsonl").string();
  TraceRecord r;
  r.assignment = {1, 2};
  {
    TraceWriter w(path);
    auto sink = w.sink();
    sink(r);
    CHECK(read_trace(path).size() == 1);
    r.test_id = 1;
    sink(r);
    CHECK(read_trace(path).size() == 2);
  }
  CHECK_THROWS_AS(TraceWriter((dir / "no" / "t.jsonl").string()), Error);
  fs::remove_all(dir);
}
