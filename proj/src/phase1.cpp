#include "dca/phase1.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace dca {

InductionScope parse_induction_scope(std::string_view text) {
  if (text == "flanking") return InductionScope::flanking;
  if (text == "all-pairs") return InductionScope::all_pairs;
  throw Error(Errc::config, "unknown induction scope '" + std::string(text) + "'");
}

const char *scope_name(InductionScope scope) noexcept {
  return scope == InductionScope::flanking ? "flanking" : "all-pairs";
}

TestLog::TestLog(Oracle &oracle, std::uint64_t seed, int first_test_id, int phase,
                 TraceSink sink)
    : oracle_(oracle), seed_(seed), next_id_(first_test_id), phase_(phase),
      sink_(std::move(sink)) {}

std::optional<TestedPoint> TestLog::find(const Assignment &x) const {
  auto it = seen_.find(x.to_string());
  if (it == seen_.end()) return std::nullopt;
  auto point = it->second;
  point.fresh = false;
  return point;
}

void TestLog::emit(const TraceRecord &r) {
  records_.push_back(r);
  if (sink_) sink_(r);
}

TestedPoint TestLog::evaluate(const Assignment &x, std::uint64_t n_games) {
  if (auto known = find(x)) return *known;
  const auto est = oracle_.evaluate(x, n_games, seed_);
  TestedPoint point{x, est, next_id_++, true};
  seen_.emplace(x.to_string(), point);
  games_ += est.n_games;
  ++fresh_;

  TraceRecord r;
  r.kind = RecordKind::test;
  r.test_id = point.test_id;
  r.phase = phase_;
  r.assignment.assign(x.order().begin(), x.order().end());
  r.mean = est.mean;
  r.se = est.se;
  r.n_games = est.n_games;
  if (best_seen_ && est.mean > *best_seen_) r.marker = Marker::star;
  if (!best_seen_ || est.mean > *best_seen_) best_seen_ = est.mean;
  emit(r);
  return point;
}

SweepState run_sweep(ElementId element, const TestedPoint &baseline, TestLog &log,
                     const Phase1Config &config) {
  SweepState s{element, baseline.assignment, baseline.assignment.rank_of(element), {}, {}, {}};
  const std::size_t n = baseline.assignment.size();
  const std::size_t current = s.current_rank.value;
  auto mean_at = [&](std::size_t r) { return s.tested.at(r).estimate.mean; };

  for (std::size_t r = 1; r <= n; ++r) {
    if (r == current) {
      auto point = baseline;
      point.fresh = false;
      s.tested.emplace(r, point);
    } else {
      s.tested.emplace(r, log.evaluate(insertion_move(baseline.assignment, element, Rank(r)),
                                       config.games));
    }
    // Peak-stop: a drop after rank p = r - 1 ends the sweep when p is the
    // element's own rank or p itself rose over p - 1. A drop right after
    // rank 1 with no left context does not count.
    if (r >= 2) {
      const std::size_t p = r - 1;
      const bool dropped = mean_at(r) < mean_at(p);
      const bool peak = p == current || (p >= 2 && mean_at(p - 1) < mean_at(p));
      if (dropped && peak) {
        s.stop_rank = Rank(r);
        break;
      }
    }
  }

  std::size_t best = s.tested.begin()->first;
  for (const auto &[r, point] : s.tested) {
    if (point.estimate.mean > mean_at(best)) best = r;
  }
  s.best_rank = Rank(best);
  return s;
}

namespace {

Submission compare_pair(const SweepState &s, std::size_t lo, std::size_t hi, double tau) {
  const auto &a = s.tested.at(lo);
  const auto &b = s.tested.at(hi);
  const auto swap = adjacent_transposition_diff(a.assignment, b.assignment);
  if (!swap) {
    throw Error(Errc::incompatible, "sweep ranks " + std::to_string(lo) + " and " +
                                        std::to_string(hi) + " are not an adjacent swap");
  }
  Submission sub;
  sub.ranks = {lo, hi};
  // Order the pair as it appears in the fitter assignment.
  if (a.estimate.mean > b.estimate.mean) {
    sub.constraint.before = swap->pair.first;
    sub.constraint.after = swap->pair.second;
  } else {
    sub.constraint.before = swap->pair.second;
    sub.constraint.after = swap->pair.first;
  }
  sub.constraint.evidence = {a.test_id, b.test_id,
                             std::fabs(a.estimate.mean - b.estimate.mean),
                             gate_threshold(a.estimate, b.estimate, tau)};
  return sub;
}

}  // namespace

std::vector<Submission> induce_from_sweep(const SweepState &s, ConstraintGraph &graph,
                                          double tau, InductionScope scope) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  auto add_pair = [&](std::size_t lo) {
    if (lo < 1 || !s.tested.count(lo) || !s.tested.count(lo + 1)) return;
    if (std::find(pairs.begin(), pairs.end(), std::pair(lo, lo + 1)) == pairs.end()) {
      pairs.emplace_back(lo, lo + 1);
    }
  };

  if (scope == InductionScope::all_pairs) {
    for (const auto &[r, point] : s.tested) add_pair(r);
  } else {
    const std::size_t best = s.best_rank.value;
    add_pair(best - 1);
    add_pair(best);
    if (!s.best().fresh) {
      std::optional<std::size_t> best_fresh;
      for (const auto &[r, point] : s.tested) {
        if (point.fresh &&
            (!best_fresh || point.estimate.mean > s.tested.at(*best_fresh).estimate.mean)) {
          best_fresh = r;
        }
      }
      if (best_fresh) {
        add_pair(*best_fresh - 1);
        add_pair(*best_fresh);
      }
    }
  }

  if (!(tau > 0.0)) throw Error(Errc::invalid_argument, "gate multiplier must be > 0");
  std::vector<Submission> out;
  for (auto [lo, hi] : pairs) {
    auto sub = compare_pair(s, lo, hi, tau);
    if (sub.constraint.evidence.gap > sub.constraint.evidence.threshold) {
      sub.outcome = graph.try_add(sub.constraint);
    }
    out.push_back(std::move(sub));
  }
  return out;
}

InductionNote to_note(const Submission &s) {
  const auto &c = s.constraint;
  return InductionNote{c.before,       c.after,
                       c.evidence.test_a, c.evidence.test_b,
                       c.evidence.gap, c.evidence.threshold,
                       s.outcome ? outcome_name(*s.outcome) : "not-induced"};
}

Phase1Result run_phase1(const Assignment &x0, Oracle &oracle, const Phase1Config &config,
                        std::uint64_t oracle_seed, TraceSink sink) {
  if (config.games == 0 || config.baseline_games == 0) {
    throw Error(Errc::config, "phase-1 game budgets must be >= 1");
  }
  if (!(config.tau > 0.0)) throw Error(Errc::config, "tau must be > 0");
  std::vector<ElementId> order = config.element_order;
  if (order.empty()) {
    order.assign(x0.order().begin(), x0.order().end());
  } else if (!Assignment(order).same_elements(x0)) {
    throw Error(Errc::config, "element_order must list every element of x0 once");
  }

  TestLog log(oracle, oracle_seed, 0, 1, std::move(sink));
  Phase1Result result{x0, {}, -1, {}, {}, {}, 0, 0, 0};
  try {
    auto incumbent = log.evaluate(x0, config.baseline_games);
    result.graph.add_nodes(x0.order());

    for (ElementId element : order) {
      const auto sweep = run_sweep(element, incumbent, log, config);
      auto subs = induce_from_sweep(sweep, result.graph, config.tau, config.scope);

      const auto &best = sweep.best();
      TraceRecord r;
      r.kind = RecordKind::sweep;
      r.test_id = best.test_id;
      r.phase = 1;
      r.assignment.assign(best.assignment.order().begin(), best.assignment.order().end());
      r.mean = best.estimate.mean;
      r.se = best.estimate.se;
      r.n_games = best.estimate.n_games;
      r.element = element;
      r.best_rank = sweep.best_rank.value;
      for (const auto &s : subs) r.inductions.push_back(to_note(s));
      log.emit(r);

      result.submissions.insert(result.submissions.end(), subs.begin(), subs.end());
      if (best.estimate.mean > incumbent.estimate.mean) incumbent = best;
    }

    result.best = incumbent.assignment;
    result.best_estimate = incumbent.estimate;
    result.best_test_id = incumbent.test_id;
  } catch (const Error &e) {
    throw PartialRunError(e, log.records());
  }
  result.trace = log.records();
  result.evaluations_used = log.games_used();
  result.tests = log.fresh_tests();
  result.next_test_id = log.next_test_id();
  return result;
}

}  // namespace dca
