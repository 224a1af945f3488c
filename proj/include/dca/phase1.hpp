#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dca/assignment.hpp"
#include "dca/constraint_graph.hpp"
#include "dca/error.hpp"
#include "dca/estimate.hpp"
#include "dca/oracle.hpp"
#include "dca/trace.hpp"

namespace dca {

enum class InductionScope {
  // Pairs flanking the sweep's best rank; when that estimate was reused rather
  // than evaluated during the sweep, also the pairs flanking the best fresh rank.
  flanking,
  // Every consecutive pair of tested ranks.
  all_pairs,
};

InductionScope parse_induction_scope(std::string_view text);
const char *scope_name(InductionScope scope) noexcept;

struct Phase1Config {
  std::uint64_t games = 1000;
  std::uint64_t baseline_games = 2000;
  double tau = 1.0;
  std::vector<ElementId> element_order;  // empty: order of appearance in x0
  InductionScope scope = InductionScope::flanking;
};

struct TestedPoint {
  Assignment assignment;
  FitnessEstimate estimate;
  int test_id = -1;
  bool fresh = false;  // evaluated by the call that returned it
};

// Every assignment evaluated so far in a run, keyed by assignment, with test
// ids handed out in evaluation order. Emits one `test` record per evaluation.
class TestLog {
 public:
  TestLog(Oracle &oracle, std::uint64_t seed, int first_test_id, int phase, TraceSink sink);

  // Reuses an earlier result for x (any budget) or evaluates it fresh.
  TestedPoint evaluate(const Assignment &x, std::uint64_t n_games);
  std::optional<TestedPoint> find(const Assignment &x) const;
  void emit(const TraceRecord &r);

  int next_test_id() const noexcept { return next_id_; }
  std::uint64_t games_used() const noexcept { return games_; }
  std::size_t fresh_tests() const noexcept { return fresh_; }
  const std::vector<TraceRecord> &records() const noexcept { return records_; }

 private:
  Oracle &oracle_;
  std::uint64_t seed_;
  int next_id_;
  int phase_;
  TraceSink sink_;
  std::map<std::string, TestedPoint> seen_;
  std::vector<TraceRecord> records_;
  std::uint64_t games_ = 0;
  std::size_t fresh_ = 0;
  std::optional<double> best_seen_;
};

struct SweepState {
  ElementId element = 0;
  Assignment baseline;
  Rank current_rank;
  std::map<std::size_t, TestedPoint> tested;  // rank -> point, a prefix 1..r
  std::optional<Rank> stop_rank;
  Rank best_rank;

  const TestedPoint &best() const { return tested.at(best_rank.value); }
};

// Inserts `element` at ranks 1, 2, ... of `baseline`, reusing the baseline's
// estimate at its current rank, and stops at the first interior peak.
SweepState run_sweep(ElementId element, const TestedPoint &baseline, TestLog &log,
                     const Phase1Config &config);

struct Submission {
  RankConstraint constraint;
  std::optional<AddOutcome> outcome;  // empty: below the noise gate
  std::pair<std::size_t, std::size_t> ranks;
};

std::vector<Submission> induce_from_sweep(const SweepState &sweep, ConstraintGraph &graph,
                                          double tau, InductionScope scope);

InductionNote to_note(const Submission &s);

struct Phase1Result {
  Assignment best;
  FitnessEstimate best_estimate;
  int best_test_id = -1;
  ConstraintGraph graph;
  std::vector<Submission> submissions;
  std::vector<TraceRecord> trace;
  std::uint64_t evaluations_used = 0;  // sum of games over fresh tests
  std::size_t tests = 0;               // fresh evaluations
  int next_test_id = 0;
};

Phase1Result run_phase1(const Assignment &x0, Oracle &oracle, const Phase1Config &config,
                        std::uint64_t oracle_seed, TraceSink sink = {});

}  // namespace dca
