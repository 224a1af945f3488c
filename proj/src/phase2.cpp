#include "dca/phase2.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "dca/error.hpp"
#include "dca/phase1.hpp"

namespace dca {

void TemperatureSchedule::validate() const {
  if (!(t0 > 0.0)) throw Error(Errc::config, "t0 must be > 0");
  if (!(dt >= 0.0)) throw Error(Errc::config, "dt must be >= 0");
  if (steps == 0) throw Error(Errc::config, "steps must be >= 1");
  if (!(t0 - static_cast<double>(steps - 1) * dt > 0.0)) {
    throw Error(Errc::config, "schedule reaches a non-positive temperature (t0 - (steps-1)*dt <= 0)");
  }
}

double temperature_at(const TemperatureSchedule &schedule, std::size_t k) {
  if (k >= schedule.steps) {
    throw Error(Errc::out_of_range, "step " + std::to_string(k) + " outside schedule of " +
                                        std::to_string(schedule.steps) + " steps");
  }
  return schedule.t0 - static_cast<double>(k) * schedule.dt;
}

double acceptance_probability(double f_current, double f_candidate, double temperature) {
  if (!(temperature > 0.0)) {
    throw Error(Errc::invalid_temperature, "temperature must be > 0");
  }
  const double delta = f_current - f_candidate;
  if (delta <= 0.0) return 1.0;
  return std::exp(-delta / temperature);
}

Proposal propose_candidate(const Assignment &current, const ConstraintGraph &graph,
                           const ProposerConfig &config, Rng &rng) {
  const auto neighbors = enumerate_insertion_neighbors(current);
  const std::size_t limit = graph.violations(current);
  const std::size_t pool = config.pool_size == 0 ? 1 : config.pool_size;

  auto pick_min = [&](const std::vector<Proposal> &candidates) {
    std::size_t best = candidates.front().violations;
    for (const auto &c : candidates) best = std::min(best, c.violations);
    std::vector<const Proposal *> ties;
    for (const auto &c : candidates) {
      if (c.violations == best) ties.push_back(&c);
    }
    return *ties[rng.below(ties.size())];
  };

  for (std::size_t round = 0; round <= config.max_redraws; ++round) {
    std::vector<Proposal> survivors;
    for (std::size_t i = 0; i < pool; ++i) {
      const auto &nb = neighbors[rng.below(neighbors.size())];
      const auto v = graph.violations(nb.assignment);
      if (v <= limit) survivors.push_back({nb.move, nb.assignment, v});
    }
    if (!survivors.empty()) return pick_min(survivors);
  }

  std::vector<Proposal> all;
  all.reserve(neighbors.size());
  std::vector<Proposal> admissible;
  for (const auto &nb : neighbors) {
    Proposal p{nb.move, nb.assignment, graph.violations(nb.assignment)};
    if (p.violations <= limit) admissible.push_back(p);
    all.push_back(std::move(p));
  }
  return pick_min(admissible.empty() ? all : admissible);
}

std::vector<ScriptedMove> parse_script_moves(std::string_view text) {
  std::vector<ScriptedMove> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::optional<double> draw;
    if (auto bar = line.find('|'); bar != std::string::npos) {
      const std::string pin = line.substr(bar + 1);
      double u = 0.0;
      char tail = 0;
      if (std::sscanf(pin.c_str(), " u=%lf %c", &u, &tail) != 1 || !(u >= 0.0 && u < 1.0)) {
        throw Error(Errc::config, "script line " + std::to_string(line_no) +
                                      ": expected '| u=<draw in [0,1)>'");
      }
      draw = u;
      line.erase(bar);
    }
    out.push_back({Assignment::parse(line), draw});
  }
  return out;
}

namespace {

// Finds the insertion move that turns `from` into `to`, if there is one.
MoveDescriptor describe_move(const Assignment &from, const Assignment &to) {
  for (const auto &nb : enumerate_insertion_neighbors(from)) {
    if (nb.assignment == to) return nb.move;
  }
  return MoveDescriptor{MoveKind::insertion, 0, Rank(1), Rank(1)};
}

}  // namespace

Phase2Result run_phase2(const Assignment &start, Oracle &oracle, const ConstraintGraph &graph,
                        const Phase2Config &config, const Phase2Seeds &seeds,
                        int first_test_id, std::optional<int> start_test_id, TraceSink sink) {
  config.schedule.validate();
  if (config.games_hi == 0) throw Error(Errc::config, "games_hi must be >= 1");
  if (!config.script.empty() && config.script.size() < config.schedule.steps) {
    throw Error(Errc::config, "scripted moves cover " + std::to_string(config.script.size()) +
                                  " of " + std::to_string(config.schedule.steps) + " steps");
  }
  for (const auto &m : config.script) {
    if (!m.assignment.same_elements(start)) {
      throw Error(Errc::config, "scripted move [" + m.assignment.to_string() +
                                    "] does not permute the start's elements");
    }
  }

  Rng proposer_rng(seeds.proposer);
  Rng acceptance_rng(seeds.acceptance);
  std::vector<TraceRecord> trace;
  auto emit = [&](const TraceRecord &r) {
    trace.push_back(r);
    if (sink) sink(r);
  };
  auto record_for = [](const Assignment &x, const FitnessEstimate &est) {
    TraceRecord r;
    r.phase = 2;
    r.assignment.assign(x.order().begin(), x.order().end());
    r.mean = est.mean;
    r.se = est.se;
    r.n_games = est.n_games;
    return r;
  };

  int next_id = first_test_id;
  std::uint64_t games = 0;
  std::size_t tests = 0;
  std::map<std::string, FitnessEstimate> seen;

  try {
    const auto start_est = oracle.evaluate(start, config.games_hi, seeds.oracle);
    seen.emplace(start.to_string(), start_est);
    games += start_est.n_games;
    ++tests;
    auto reeval = record_for(start, start_est);
    reeval.kind = RecordKind::reeval;
    reeval.test_id = start_test_id ? *start_test_id : next_id++;
    reeval.marker = Marker::star;
    reeval.violations = graph.violations(start);
    emit(reeval);

    Phase2Result result{start, start_est, start, start_est, {}, 0, 0, 0};
    std::size_t current_violations = graph.violations(start);

    for (std::size_t k = 0; k < config.schedule.steps; ++k) {
      const double temperature = temperature_at(config.schedule, k);
      std::optional<double> pinned;
      Proposal proposal{{}, start, 0};
      if (config.script.empty()) {
        proposal = propose_candidate(result.current, graph, config.proposer, proposer_rng);
      } else {
        const auto &m = config.script[k];
        proposal = {describe_move(result.current, m.assignment), m.assignment,
                    graph.violations(m.assignment)};
        pinned = m.draw;
      }

      FitnessEstimate est;
      bool cached = false;
      if (auto it = seen.find(proposal.assignment.to_string()); it != seen.end()) {
        est = it->second;
        cached = true;
      } else {
        est = oracle.evaluate(proposal.assignment, config.games_hi, seeds.oracle);
        seen.emplace(proposal.assignment.to_string(), est);
        games += est.n_games;
        ++tests;
      }

      auto r = record_for(proposal.assignment, est);
      r.kind = RecordKind::step;
      r.test_id = next_id++;
      r.cached = cached;
      r.temperature = temperature;
      r.violations = proposal.violations;
      const double delta = result.current_estimate.mean - est.mean;
      r.delta = delta;

      bool accept = false;
      const bool admissible = proposal.violations <= current_violations;
      if (!admissible) {
        r.decision = Decision::rejected_infeasible;
      } else if (delta <= 0.0) {
        r.probability = 1.0;
        r.decision = Decision::improved;
        accept = true;
      } else {
        const double p = acceptance_probability(result.current_estimate.mean, est.mean,
                                                temperature);
        r.probability = p;
        const double u = pinned ? *pinned : acceptance_rng.uniform();
        accept = u < p;
        r.decision = accept ? Decision::accepted_worse : Decision::rejected_worse;
        r.marker = accept ? Marker::accepted_worse : Marker::rejected_worse;
      }

      if (admissible && est.mean > result.best_estimate.mean) {
        result.best = proposal.assignment;
        result.best_estimate = est;
        r.marker = Marker::star;
      }
      if (accept) {
        result.current = proposal.assignment;
        result.current_estimate = est;
        current_violations = proposal.violations;
      }
      emit(r);
    }

    result.trace = std::move(trace);
    result.evaluations_used = games;
    result.tests = tests;
    result.next_test_id = next_id;
    return result;
  } catch (const PartialRunError &) {
    throw;
  } catch (const Error &e) {
    throw PartialRunError(e, trace);
  }
}

}  // namespace dca
