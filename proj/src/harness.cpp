#include "dca/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "dca/error.hpp"
#include "dca/rng.hpp"
#include "json_util.hpp"

namespace dca {

using detail::json;

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::io, "write failed for " + path.string());
}

namespace {

std::filesystem::path resolve(const std::filesystem::path &base, const std::string &p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path &base_dir) {
  const json doc = detail::parse_json(json_text, "run config");
  detail::check_keys(doc, {"initial", "seed", "out_dir", "oracle", "phase1", "phase2"},
                     "run config");
  RunConfig cfg;
  cfg.base_dir = base_dir;
  if (doc.contains("initial")) {
    cfg.initial = Assignment(detail::require<std::vector<ElementId>>(doc, "initial", "run config"));
  }
  if (doc.contains("seed")) cfg.seed = detail::require<std::uint64_t>(doc, "seed", "run config");
  if (doc.contains("out_dir")) {
    cfg.out_dir = resolve(base_dir, detail::require<std::string>(doc, "out_dir", "run config"));
  }
  if (!doc.contains("oracle")) throw Error(Errc::config, "run config is missing 'oracle'");
  cfg.oracle_spec = doc.at("oracle").dump();

  bool games_hi_set = false;
  if (doc.contains("phase1")) {
    const auto &p1 = doc.at("phase1");
    detail::check_keys(p1, {"games", "baseline_games", "tau", "element_order", "induction_scope"},
                       "phase1");
    cfg.phase1.games = detail::get_or<std::uint64_t>(p1, "games", cfg.phase1.games, "phase1");
    cfg.phase1.baseline_games =
        detail::get_or<std::uint64_t>(p1, "baseline_games", cfg.phase1.baseline_games, "phase1");
    cfg.phase1.tau = detail::get_or<double>(p1, "tau", cfg.phase1.tau, "phase1");
    cfg.phase1.element_order =
        detail::get_or<std::vector<ElementId>>(p1, "element_order", {}, "phase1");
    cfg.phase1.scope = parse_induction_scope(
        detail::get_or<std::string>(p1, "induction_scope", "flanking", "phase1"));
  }
  if (doc.contains("phase2")) {
    const auto &p2 = doc.at("phase2");
    detail::check_keys(p2, {"t0", "dt", "steps", "pool_size", "games_hi", "script_moves",
                            "start", "graph"},
                       "phase2");
    auto &s = cfg.phase2.schedule;
    s.t0 = detail::get_or<double>(p2, "t0", s.t0, "phase2");
    s.dt = detail::get_or<double>(p2, "dt", s.dt, "phase2");
    s.steps = detail::get_or<std::size_t>(p2, "steps", s.steps, "phase2");
    cfg.phase2.proposer.pool_size =
        detail::get_or<std::size_t>(p2, "pool_size", cfg.phase2.proposer.pool_size, "phase2");
    if (p2.contains("games_hi")) {
      cfg.phase2.games_hi = detail::require<std::uint64_t>(p2, "games_hi", "phase2");
      games_hi_set = true;
    }
    if (p2.contains("script_moves")) {
      cfg.phase2.script = parse_script_moves(
          read_file(resolve(base_dir, detail::require<std::string>(p2, "script_moves", "phase2"))));
    }
    if (p2.contains("start")) {
      cfg.start = Assignment(detail::require<std::vector<ElementId>>(p2, "start", "phase2"));
    }
    if (p2.contains("graph")) {
      cfg.graph = parse_edge_list(
          read_file(resolve(base_dir, detail::require<std::string>(p2, "graph", "phase2"))));
    }
  }
  if (!games_hi_set) cfg.phase2.games_hi = 16 * cfg.phase1.games;
  return cfg;
}

void validate(const RunConfig &config, RunMode mode) {
  if (!config.seed) throw Error(Errc::config, "a seed is required (no wall-clock seeding)");
  if (config.oracle_spec.empty()) throw Error(Errc::config, "no oracle configured");
  if (mode != RunMode::phase2_only) {
    if (!config.initial) throw Error(Errc::config, "run config is missing 'initial'");
    if (config.phase1.games == 0 || config.phase1.baseline_games == 0) {
      throw Error(Errc::config, "phase-1 game budgets must be >= 1");
    }
    if (!(config.phase1.tau > 0.0)) throw Error(Errc::config, "tau must be > 0");
    if (!config.phase1.element_order.empty() &&
        !Assignment(config.phase1.element_order).same_elements(*config.initial)) {
      throw Error(Errc::config, "element_order must list every element of 'initial' once");
    }
  }
  if (mode != RunMode::phase1_only) {
    config.phase2.schedule.validate();
    if (config.phase2.games_hi == 0) throw Error(Errc::config, "games_hi must be >= 1");
    if (config.phase2.proposer.pool_size == 0) throw Error(Errc::config, "pool_size must be >= 1");
    if (!config.phase2.script.empty() &&
        config.phase2.script.size() < config.phase2.schedule.steps) {
      throw Error(Errc::config, "scripted moves do not cover every annealing step");
    }
  }
  if (mode == RunMode::phase2_only && (!config.start || !config.graph)) {
    throw Error(Errc::config, "phase 2 alone needs a start assignment and a constraint graph");
  }
}

ExperimentSummary run_experiment(const RunConfig &config, RunMode mode) {
  validate(config, mode);
  return run_experiment(config, mode, make_oracle(config.oracle_spec, config.base_dir));
}

ExperimentSummary run_experiment(const RunConfig &config, RunMode mode,
                                 std::shared_ptr<Oracle> oracle) {
  validate(config, mode);
  const auto started = std::chrono::steady_clock::now();
  auto cached = std::make_shared<CachedOracle>(std::move(oracle));
  const std::uint64_t master = *config.seed;
  const Phase2Seeds seeds{derive_seed(master, "oracle"), derive_seed(master, "proposer"),
                          derive_seed(master, "acceptance")};

  std::unique_ptr<TraceWriter> writer;
  if (!config.out_dir.empty()) {
    std::filesystem::create_directories(config.out_dir);
    writer = std::make_unique<TraceWriter>((config.out_dir / "trace.jsonl").string());
  }
  TraceSink sink;
  if (writer) sink = writer->sink();

  std::optional<Phase1Result> p1;
  std::optional<Phase2Result> p2;
  ConstraintGraph graph;
  if (mode != RunMode::phase2_only) {
    p1 = run_phase1(*config.initial, *cached, config.phase1, seeds.oracle, sink);
    graph = p1->graph;
  } else {
    graph = *config.graph;
  }
  if (mode != RunMode::phase1_only) {
    const Assignment start = p1 ? p1->best : *config.start;
    if (!p1) graph.add_nodes(start.order());
    p2 = run_phase2(start, *cached, graph, config.phase2, seeds, p1 ? p1->next_test_id : 0,
                    p1 ? std::optional<int>(p1->best_test_id) : std::nullopt, sink);
  }

  ExperimentSummary summary{p1, p2, p2 ? p2->best : p1->best,
                            p2 ? p2->best_estimate : p1->best_estimate, graph, 0, 0, 0.0, {}};
  if (p1) {
    summary.games += p1->evaluations_used;
    summary.evaluations += p1->tests;
    summary.trace = p1->trace;
  }
  if (p2) {
    summary.games += p2->evaluations_used;
    summary.evaluations += p2->tests;
    summary.trace.insert(summary.trace.end(), p2->trace.begin(), p2->trace.end());
  }
  summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  if (!config.out_dir.empty()) {
    std::string csv = csv_header();
    for (const auto &r : summary.trace) csv += to_csv_row(r);
    write_file(config.out_dir / "trace.csv", csv);
    write_file(config.out_dir / "constraints.edges", to_edge_list(graph));
    export_dag(graph, config.out_dir / "dag.dot");
    write_file(config.out_dir / "summary.json", summary_to_json(summary) + "\n");
  }
  return summary;
}

std::string summary_to_json(const ExperimentSummary &s) {
  nlohmann::ordered_json j;
  auto order = [](const Assignment &x) {
    return std::vector<ElementId>(x.order().begin(), x.order().end());
  };
  j["best"] = order(s.best);
  j["best_mean"] = s.best_estimate.mean;
  j["best_se"] = s.best_estimate.se;
  j["best_violations"] = s.graph.violations(s.best);
  auto &constraints = j["constraints"] = nlohmann::ordered_json::array();
  for (const auto &c : s.graph.edges()) constraints.push_back({c.before, c.after});
  j["games"] = s.games;
  j["evaluations"] = s.evaluations;
  if (s.phase1) {
    j["phase1"] = {{"best", order(s.phase1->best)},
                   {"mean", s.phase1->best_estimate.mean},
                   {"se", s.phase1->best_estimate.se},
                   {"tests", s.phase1->tests},
                   {"games", s.phase1->evaluations_used}};
  }
  if (s.phase2) {
    j["phase2"] = {{"best", order(s.phase2->best)},
                   {"mean", s.phase2->best_estimate.mean},
                   {"se", s.phase2->best_estimate.se},
                   {"tests", s.phase2->tests},
                   {"games", s.phase2->evaluations_used}};
  }
  j["wall_seconds"] = s.wall_seconds;
  return j.dump(2);
}

BruteForceResult brute_force_optimum(const Landscape &landscape, const ConstraintGraph *graph) {
  const std::size_t n = landscape.size();
  if (n > kBruteForceMaxElements) {
    throw Error(Errc::too_large,
                "refusing exhaustive search over " + std::to_string(n) +
                    " elements (limit " + std::to_string(kBruteForceMaxElements) +
                    "); use the two-phase optimiser or add constraints and a smaller instance");
  }
  std::vector<ElementId> elements = landscape.target;
  std::sort(elements.begin(), elements.end());

  std::optional<BruteForceResult> best;
  std::uint64_t count = 0;
  auto visit = [&](const Assignment &x) {
    ++count;
    const double mean = landscape.true_fitness(x);
    if (!best || mean > best->mean) best = BruteForceResult{x, mean, 0};
    return true;
  };
  if (graph) {
    for_each_linear_extension(*graph, elements, visit);
  } else {
    do {
      visit(Assignment(elements));
    } while (std::next_permutation(elements.begin(), elements.end()));
  }
  if (!best) throw Error(Errc::incompatible, "constraint graph admits no assignment");
  best->enumerated = count;
  return *best;
}

std::string ReplayReport::to_json() const {
  nlohmann::ordered_json j;
  j["constraints_match"] = constraints_match;
  j["values_match"] = values_match;
  j["discrepancies"] = discrepancies;
  return j.dump(2);
}

namespace {

// Published reference values.
const std::set<std::pair<ElementId, ElementId>> kPublishedConstraints = {
    {10, 11}, {11, 9}, {2, 3}, {3, 10}, {3, 6}, {6, 10},
    {4, 10},  {5, 4},  {4, 7}, {7, 10}, {4, 8}, {8, 10}};
const std::set<std::pair<ElementId, ElementId>> kPublishedBrackets = {
    {2, 10}, {6, 9}, {3, 4}, {3, 5}};  // unordered, smaller id first
constexpr const char *kPhase1Best = "2 3 5 4 8 10 11 9 6 7";
constexpr double kPhase1Mean = -3.12261;
constexpr const char *kPhase2Best = "5 4 2 3 7 6 8 10 11 9";
constexpr double kPhase2Mean = -2.95471;
constexpr std::size_t kPhase1Tests = 36;
struct StepExpectation {
  int test_id;
  Decision decision;
  std::optional<double> probability;
};
const StepExpectation kSteps[] = {
    {39, Decision::accepted_worse, 0.90833},
    {41, Decision::rejected_worse, std::nullopt},
    {45, Decision::rejected_worse, 0.36825},
};
constexpr double kProbabilityTolerance = 5e-6;
constexpr double kPublishedTest41Probability = 0.31854;

std::string fmt(const char *pattern, double v) {
  char buf[128];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string pair_text(std::pair<ElementId, ElementId> p, const char *sep) {
  return std::to_string(p.first) + sep + std::to_string(p.second);
}

}  // namespace

ReplayReport replay_verify(std::vector<ReplayRecord> phase1_records,
                           std::vector<ReplayRecord> phase2_records,
                           std::vector<ScriptedMove> script) {
  if (phase1_records.empty() || phase2_records.empty()) {
    throw Error(Errc::config, "replay fixtures are empty");
  }
  ReplayReport report;
  const Assignment x0 = phase1_records.front().assignment;
  std::vector<ReplayRecord> all = phase1_records;
  all.insert(all.end(), phase2_records.begin(), phase2_records.end());
  auto oracle = std::make_shared<ReplayOracle>(std::move(all));

  RunConfig cfg;
  cfg.initial = x0;
  cfg.oracle_spec = R"({"kind":"replay"})";
  cfg.seed = 2019;
  cfg.phase2.script = std::move(script);
  const auto summary = run_experiment(cfg, RunMode::both, oracle);
  const auto &p1 = *summary.phase1;
  const auto &p2 = *summary.phase2;

  // Constraint set and bracketed non-inductions.
  std::set<std::pair<ElementId, ElementId>> induced;
  for (const auto &c : p1.graph.edges()) induced.emplace(c.before, c.after);
  std::set<std::pair<ElementId, ElementId>> brackets;
  for (const auto &s : p1.submissions) {
    if (!s.outcome) {
      brackets.emplace(std::min(s.constraint.before, s.constraint.after),
                       std::max(s.constraint.before, s.constraint.after));
    }
  }
  report.constraints_match = induced == kPublishedConstraints && brackets == kPublishedBrackets;
  for (const auto &c : kPublishedConstraints) {
    if (!induced.count(c)) report.discrepancies.push_back("missing constraint rho(" + pair_text(c, ")<rho(") + ")");
  }
  for (const auto &c : induced) {
    if (!kPublishedConstraints.count(c)) report.discrepancies.push_back("extra constraint rho(" + pair_text(c, ")<rho(") + ")");
  }
  for (const auto &b : kPublishedBrackets) {
    if (!brackets.count(b)) report.discrepancies.push_back("missing bracketed pair [" + pair_text(b, ",") + "]");
  }
  for (const auto &b : brackets) {
    if (!kPublishedBrackets.count(b)) report.discrepancies.push_back("extra bracketed pair [" + pair_text(b, ",") + "]");
  }

  // Values.
  bool values = true;
  auto check = [&](bool ok, const std::string &what) {
    if (!ok) {
      values = false;
      report.discrepancies.push_back(what);
    }
  };
  check(p1.best.to_string() == kPhase1Best,
        "phase-1 best is [" + p1.best.to_string() + "], expected [" + kPhase1Best + "]");
  check(p1.best_estimate.mean == kPhase1Mean,
        fmt("phase-1 best mean %.6g, expected -3.12261", p1.best_estimate.mean));
  check(p1.tests == kPhase1Tests,
        "phase 1 evaluated " + std::to_string(p1.tests) + " assignments, expected 36");
  check(p2.best.to_string() == kPhase2Best,
        "phase-2 best is [" + p2.best.to_string() + "], expected [" + kPhase2Best + "]");
  check(p2.best_estimate.mean == kPhase2Mean,
        fmt("phase-2 best mean %.6g, expected -2.95471", p2.best_estimate.mean));
  for (const auto &expect : kSteps) {
    auto it = std::find_if(p2.trace.begin(), p2.trace.end(), [&](const TraceRecord &r) {
      return r.kind == RecordKind::step && r.test_id == expect.test_id;
    });
    if (it == p2.trace.end()) {
      check(false, "no annealing step with test id " + std::to_string(expect.test_id));
      continue;
    }
    check(it->decision == expect.decision,
          "test " + std::to_string(expect.test_id) + " tagged " +
              (it->decision ? decision_name(*it->decision) : "none") + ", expected " +
              decision_name(expect.decision));
    if (expect.probability) {
      const double p = it->probability.value_or(-1.0);
      check(std::fabs(p - *expect.probability) <= kProbabilityTolerance,
            "test " + std::to_string(expect.test_id) + fmt(" acceptance probability %.6f", p) +
                fmt(", expected %.5f", *expect.probability));
    }
    if (expect.test_id == 41 && it->probability) {
      report.discrepancies.push_back(
          "note: test 41 acceptance probability is " + fmt("%.5f", *it->probability) +
          fmt(" at T=%.2f", it->temperature.value_or(0.0)) + "; the published " +
          fmt("%.5f", kPublishedTest41Probability) + " corresponds to T=0.06");
    }
  }
  report.values_match = values;
  return report;
}

ReplayReport replay_verify(const std::filesystem::path &fixture_dir) {
  const auto t12 = fixture_dir / "table1_2.replay";
  const auto t3 = fixture_dir / "table3.replay";
  const auto moves = fixture_dir / "table3.moves";
  for (const auto &p : {t12, t3, moves}) {
    if (!std::filesystem::exists(p)) throw Error(Errc::io, "missing fixture " + p.string());
  }
  return replay_verify(load_replay_fixture(t12), load_replay_fixture(t3),
                       parse_script_moves(read_file(moves)));
}

void export_dag(const ConstraintGraph &graph, const std::filesystem::path &path) {
  write_file(path, to_dot(graph.transitive_reduction()));
}

ConstraintGraph graph_from_trace(const std::vector<TraceRecord> &trace) {
  ConstraintGraph g;
  for (const auto &r : trace) {
    if (r.phase == 1 && r.kind == RecordKind::test) g.add_nodes(r.assignment);
    for (const auto &n : r.inductions) {
      if (n.outcome == "added") {
        g.try_add(RankConstraint{n.before, n.after, {n.test_a, n.test_b, n.gap, n.threshold}});
      }
    }
  }
  return g;
}

}  // namespace dca
