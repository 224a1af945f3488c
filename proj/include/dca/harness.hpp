#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dca/assignment.hpp"
#include "dca/constraint_graph.hpp"
#include "dca/oracle.hpp"
#include "dca/phase1.hpp"
#include "dca/phase2.hpp"

namespace dca {

enum class RunMode { both, phase1_only, phase2_only };

struct RunConfig {
  std::optional<Assignment> initial;  // required unless phase2_only
  std::string oracle_spec;            // JSON text, see make_oracle
  Phase1Config phase1;
  Phase2Config phase2;
  std::optional<std::uint64_t> seed;  // mandatory before running
  std::filesystem::path out_dir;      // empty: no files written
  std::filesystem::path base_dir;     // resolves relative paths in the config

  // phase2_only inputs
  std::optional<Assignment> start;
  std::optional<ConstraintGraph> graph;
};

// Parses the JSON config document. Unknown keys are errors.
//   {"initial":[...], "seed":S, "out_dir":"...",
//    "oracle":{...},
//    "phase1":{"games":G,"baseline_games":B,"tau":t,"element_order":[...],
//              "induction_scope":"flanking"|"all-pairs"},
//    "phase2":{"t0":..,"dt":..,"steps":..,"pool_size":m,"games_hi":H,
//              "script_moves":"path"}}
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path &base_dir);

// Validates budgets, schedule and seed before any evaluation.
void validate(const RunConfig &config, RunMode mode);

struct ExperimentSummary {
  std::optional<Phase1Result> phase1;
  std::optional<Phase2Result> phase2;
  Assignment best;
  FitnessEstimate best_estimate;
  ConstraintGraph graph;
  std::uint64_t games = 0;       // game samples over fresh evaluations
  std::size_t evaluations = 0;   // fresh evaluations
  double wall_seconds = 0.0;
  std::vector<TraceRecord> trace;
};

// Runs the requested phases. With out_dir set, writes trace.jsonl, trace.csv,
// constraints.edges, dag.dot and summary.json there.
ExperimentSummary run_experiment(const RunConfig &config, RunMode mode = RunMode::both);
ExperimentSummary run_experiment(const RunConfig &config, RunMode mode,
                                 std::shared_ptr<Oracle> oracle);

std::string summary_to_json(const ExperimentSummary &summary);

struct BruteForceResult {
  Assignment best;
  double mean = 0.0;
  std::uint64_t enumerated = 0;
};

inline constexpr std::size_t kBruteForceMaxElements = 9;

// Exhaustive maximisation over all permutations of the landscape's elements,
// or over the linear extensions of `graph`. Ties go to the lexicographically
// smallest assignment. Refuses more than 9 elements.
BruteForceResult brute_force_optimum(const Landscape &landscape,
                                     const ConstraintGraph *graph = nullptr);

struct ReplayReport {
  bool constraints_match = false;
  bool values_match = false;
  // Named differences; entries starting with "note:" are known
  // inconsistencies and do not affect the match flags.
  std::vector<std::string> discrepancies;

  bool all_match() const { return constraints_match && values_match; }
  std::string to_json() const;
};

// Runs the full pipeline against table1_2.replay, table3.replay and
// table3.moves in `fixture_dir` and diffs against the published traces.
ReplayReport replay_verify(const std::filesystem::path &fixture_dir);

// Replays the published traces from already-loaded inputs (for tests that perturb them).
ReplayReport replay_verify(std::vector<ReplayRecord> phase1_records,
                           std::vector<ReplayRecord> phase2_records,
                           std::vector<ScriptedMove> script);

// Writes the DOT rendering of the transitive reduction.
void export_dag(const ConstraintGraph &graph, const std::filesystem::path &path);

// Rebuilds the constraint graph recorded in a trace (added inductions only).
ConstraintGraph graph_from_trace(const std::vector<TraceRecord> &trace);

std::string read_file(const std::filesystem::path &path);
void write_file(const std::filesystem::path &path, const std::string &text);

}  // namespace dca
