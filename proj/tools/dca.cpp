// Command-line front end. Talks to the library only through the C API.
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "dca/dca.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct Failure {
  dca_status status;
  std::string message;
};

void check(dca_status status) {
  if (status != DCA_OK) throw Failure{status, dca_last_error()};
}

std::string slurp(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{DCA_ERR_IO, "cannot read " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string take(char *s) {
  std::string out = s ? s : "";
  dca_string_free(s);
  return out;
}

struct Overrides {
  std::optional<int> games, games_hi, steps, pool_size;
  std::optional<double> tau, t0, dt;
  std::optional<std::string> scope, script_moves;
};

void add_overrides(CLI::App *cmd, Overrides &o) {
  cmd->add_option("--games", o.games, "phase-1 games per evaluation");
  cmd->add_option("--games-hi", o.games_hi, "phase-2 games per evaluation");
  cmd->add_option("--tau", o.tau, "significance multiplier");
  cmd->add_option("--t0", o.t0, "initial temperature");
  cmd->add_option("--dt", o.dt, "temperature decrement per step");
  cmd->add_option("--steps", o.steps, "number of annealing steps");
  cmd->add_option("--pool-size", o.pool_size, "proposer tournament size");
  cmd->add_option("--induction-scope", o.scope, "flanking or all-pairs")
      ->check(CLI::IsMember({"flanking", "all-pairs"}));
  cmd->add_option("--script-moves", o.script_moves, "scripted phase-2 moves");
}

// Merges command-line overrides into the config document.
std::string merged_config(const std::string &path, const Overrides &o) {
  ordered_json cfg = ordered_json::parse(slurp(path), nullptr, false);
  if (cfg.is_discarded() || !cfg.is_object()) {
    throw Failure{DCA_ERR_CONFIG, path + ": not a JSON object"};
  }
  auto section = [&](const char *name) -> ordered_json & {
    if (!cfg.contains(name)) cfg[name] = ordered_json::object();
    return cfg[name];
  };
  if (o.games) section("phase1")["games"] = *o.games;
  if (o.tau) section("phase1")["tau"] = *o.tau;
  if (o.scope) section("phase1")["induction_scope"] = *o.scope;
  if (o.games_hi) section("phase2")["games_hi"] = *o.games_hi;
  if (o.t0) section("phase2")["t0"] = *o.t0;
  if (o.dt) section("phase2")["dt"] = *o.dt;
  if (o.steps) section("phase2")["steps"] = *o.steps;
  if (o.pool_size) section("phase2")["pool_size"] = *o.pool_size;
  if (o.script_moves) section("phase2")["script_moves"] = fs::absolute(*o.script_moves).string();
  return cfg.dump();
}

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out, graph, start;
  Overrides overrides;
};

int run(const RunArgs &a, dca_run_mode mode) {
  const std::string text = merged_config(a.config, a.overrides);
  const std::string base = fs::absolute(a.config).parent_path().string();
  dca_run_options opts{};
  opts.mode = mode;
  opts.has_seed = a.seed.has_value();
  opts.seed = a.seed.value_or(0);
  opts.out_dir = a.out ? a.out->c_str() : nullptr;
  opts.graph_path = a.graph ? a.graph->c_str() : nullptr;
  opts.start = a.start ? a.start->c_str() : nullptr;
  dca_run *handle = nullptr;
  check(dca_run_experiment(text.c_str(), base.c_str(), &opts, &handle));
  char *summary = nullptr;
  const dca_status st = dca_run_summary_json(handle, &summary);
  dca_run_destroy(handle);
  check(st);
  std::cout << take(summary) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Dynamic constraint annealing for permutation problems"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(dca_version()));

  RunArgs optimize_args, phase1_args, phase2_args;
  auto *optimize = app.add_subcommand("optimize", "run both phases");
  auto *phase1 = app.add_subcommand("phase1", "run constraint-inducing hill climbing only");
  auto *phase2 = app.add_subcommand("phase2", "run constraint-steered annealing only");
  for (auto [cmd, args] : {std::pair{optimize, &optimize_args}, std::pair{phase1, &phase1_args},
                           std::pair{phase2, &phase2_args}}) {
    cmd->add_option("--config", args->config, "run config (JSON)")->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", args->seed, "master seed");
    cmd->add_option("--out", args->out, "output directory");
    add_overrides(cmd, args->overrides);
  }
  phase2->add_option("--graph", phase2_args.graph, "constraint edge list")->required()
      ->check(CLI::ExistingFile);
  phase2->add_option("--start", phase2_args.start, "start assignment, e.g. \"2 3 1\"")
      ->required();

  std::string fixtures;
  auto *replay = app.add_subcommand("replay", "replay the published traces");
  replay->add_option("--fixtures", fixtures, "fixture directory")->required();

  std::string landscape;
  std::optional<std::string> brute_graph;
  auto *brute = app.add_subcommand("brute", "exhaustive optimum of a landscape");
  brute->add_option("--landscape", landscape, "landscape (JSON)")->required()
      ->check(CLI::ExistingFile);
  brute->add_option("--graph", brute_graph, "restrict to linear extensions of this edge list")
      ->check(CLI::ExistingFile);

  std::string trace_path, dot_path;
  auto *export_dag = app.add_subcommand("export-dag", "write the constraint DAG of a trace");
  export_dag->add_option("--trace", trace_path, "trace.jsonl")->required()
      ->check(CLI::ExistingFile);
  export_dag->add_option("--out", dot_path, "DOT output")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*optimize) return run(optimize_args, DCA_MODE_BOTH);
    if (*phase1) return run(phase1_args, DCA_MODE_PHASE1);
    if (*phase2) return run(phase2_args, DCA_MODE_PHASE2);
    if (*replay) {
      char *report = nullptr;
      int all_match = 0;
      check(dca_replay_verify(fixtures.c_str(), &report, &all_match));
      std::cout << take(report) << "\n";
      return all_match ? 0 : 1;
    }
    if (*brute) {
      dca_graph *graph = nullptr;
      if (brute_graph) check(dca_graph_load_edge_list(brute_graph->c_str(), &graph));
      char *result = nullptr;
      const dca_status st = dca_brute_force(slurp(landscape).c_str(), graph, &result);
      dca_graph_destroy(graph);
      check(st);
      std::cout << take(result) << "\n";
      return 0;
    }
    if (*export_dag) {
      check(dca_export_dag_from_trace(trace_path.c_str(), dot_path.c_str()));
      return 0;
    }
  } catch (const Failure &f) {
    std::cerr << "dca: " << dca_status_name(f.status) << ": " << f.message << "\n";
    return 2;
  }
  return 0;
}
