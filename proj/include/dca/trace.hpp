#pragma once

#include <cstddef>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dca/assignment.hpp"
#include "dca/error.hpp"
#include "dca/estimate.hpp"

namespace dca {

// test:   a fresh evaluation (phase 1).
// sweep:  end-of-sweep summary with induction decisions; test_id = best test.
// reeval: phase-2 high-precision re-evaluation of the start; keeps its old id.
// step:   one annealing step.
enum class RecordKind { test, sweep, reeval, step };
enum class Marker { none, star, accepted_worse, rejected_worse };
enum class Decision { improved, accepted_worse, rejected_worse, rejected_infeasible };

const char *kind_name(RecordKind k) noexcept;
const char *marker_name(Marker m) noexcept;
const char *decision_name(Decision d) noexcept;

// One submitted (or below-gate) ranking constraint. outcome is an AddOutcome
// name or "not-induced"; before/after follow the fitter assignment's order.
struct InductionNote {
  ElementId before = 0;
  ElementId after = 0;
  int test_a = -1;
  int test_b = -1;
  double gap = 0.0;
  double threshold = 0.0;
  std::string outcome;

  friend bool operator==(const InductionNote &, const InductionNote &) = default;
};

struct TraceRecord {
  RecordKind kind = RecordKind::test;
  int test_id = 0;
  int phase = 1;
  std::vector<ElementId> assignment;
  double mean = 0.0;
  double se = 0.0;
  std::uint64_t n_games = 0;
  Marker marker = Marker::none;

  // sweep
  std::optional<ElementId> element;
  std::optional<std::size_t> best_rank;
  std::vector<InductionNote> inductions;

  // step
  std::optional<double> temperature;
  std::optional<double> delta;
  std::optional<double> probability;
  std::optional<Decision> decision;
  std::optional<std::size_t> violations;
  bool cached = false;

  friend bool operator==(const TraceRecord &, const TraceRecord &) = default;
};

std::string to_json_line(const TraceRecord &r);
TraceRecord parse_trace_line(std::string_view line);
std::vector<TraceRecord> read_trace(const std::string &path);

std::string csv_header();
std::string to_csv_row(const TraceRecord &r);

// Thrown when an oracle fails mid-run; carries the trace written so far.
class PartialRunError : public Error {
 public:
  PartialRunError(const Error &cause, std::vector<TraceRecord> partial)
      : Error(cause.code(), cause.what()), partial_(std::move(partial)) {}
  const std::vector<TraceRecord> &partial_trace() const noexcept { return partial_; }

 private:
  std::vector<TraceRecord> partial_;
};

using TraceSink = std::function<void(const TraceRecord &)>;

// Append-only JSONL writer; flushes per record so long runs stream safely.
class TraceWriter {
 public:
  explicit TraceWriter(const std::string &path);
  void write(const TraceRecord &r);
  TraceSink sink() {
    return [this](const TraceRecord &r) { write(r); };
  }

 private:
  std::ofstream out_;
};

}  // namespace dca
