#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "dca/assignment.hpp"
#include "dca/constraint_graph.hpp"
#include "dca/estimate.hpp"
#include "dca/oracle.hpp"
#include "dca/rng.hpp"
#include "dca/trace.hpp"

namespace dca {

// Linear schedule T_k = t0 - k * dt for k in [0, steps).
struct TemperatureSchedule {
  double t0 = 0.10;
  double dt = 0.01;
  std::size_t steps = 10;

  // Throws Error(config) unless t0 > 0, dt >= 0, steps >= 1 and the last
  // temperature stays positive.
  void validate() const;
};

double temperature_at(const TemperatureSchedule &schedule, std::size_t k);

// Boltzmann acceptance for maximisation: delta = f_current - f_candidate,
// 1 when delta <= 0, else exp(-delta / T).
double acceptance_probability(double f_current, double f_candidate, double temperature);

struct ProposerConfig {
  std::size_t pool_size = 8;
  std::size_t max_redraws = 16;
};

struct Proposal {
  MoveDescriptor move;
  Assignment assignment;
  std::size_t violations = 0;
};

// Tournament over pool_size uniformly drawn insertion neighbours: drops draws
// with more violations than `current`, returns a minimal-violation survivor
// (uniform tie-break). After max_redraws empty rounds, falls back to a full
// scan of the neighbourhood.
Proposal propose_candidate(const Assignment &current, const ConstraintGraph &graph,
                           const ProposerConfig &config, Rng &rng);

// One scripted candidate; `draw` pins the uniform used if it is worse.
struct ScriptedMove {
  Assignment assignment;
  std::optional<double> draw;
};

// One assignment per line, optionally followed by `| u=<draw>`; `#` comments.
std::vector<ScriptedMove> parse_script_moves(std::string_view text);

struct Phase2Config {
  TemperatureSchedule schedule;
  std::uint64_t games_hi = 16000;
  ProposerConfig proposer;
  std::vector<ScriptedMove> script;  // empty: use the proposer
};

struct Phase2Seeds {
  std::uint64_t oracle = 0;
  std::uint64_t proposer = 0;
  std::uint64_t acceptance = 0;
};

struct Phase2Result {
  Assignment best;
  FitnessEstimate best_estimate;
  Assignment current;
  FitnessEstimate current_estimate;
  std::vector<TraceRecord> trace;
  std::uint64_t evaluations_used = 0;
  std::size_t tests = 0;
  int next_test_id = 0;
};

// Re-evaluates `start` at games_hi, then anneals for schedule.steps steps.
// start_test_id labels the re-evaluation record (first_test_id when absent);
// step records take ids from first_test_id onwards.
Phase2Result run_phase2(const Assignment &start, Oracle &oracle, const ConstraintGraph &graph,
                        const Phase2Config &config, const Phase2Seeds &seeds,
                        int first_test_id = 0, std::optional<int> start_test_id = {},
                        TraceSink sink = {});

}  // namespace dca
