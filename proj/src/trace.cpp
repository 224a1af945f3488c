#include "dca/trace.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "dca/error.hpp"
#include "json_util.hpp"

namespace dca {

using detail::json;

const char *kind_name(RecordKind k) noexcept {
  switch (k) {
    case RecordKind::test: return "test";
    case RecordKind::sweep: return "sweep";
    case RecordKind::reeval: return "reeval";
    case RecordKind::step: return "step";
  }
  return "?";
}

const char *marker_name(Marker m) noexcept {
  switch (m) {
    case Marker::none: return "";
    case Marker::star: return "*";
    case Marker::accepted_worse: return "a";
    case Marker::rejected_worse: return "r";
  }
  return "?";
}

const char *decision_name(Decision d) noexcept {
  switch (d) {
    case Decision::improved: return "improved";
    case Decision::accepted_worse: return "accepted-worse";
    case Decision::rejected_worse: return "rejected-worse";
    case Decision::rejected_infeasible: return "rejected-infeasible";
  }
  return "?";
}

namespace {

template <class E, std::size_t N>
E parse_enum(const std::string &text, const E (&values)[N], const char *(*name)(E) noexcept,
             const char *what) {
  for (E v : values) {
    if (text == name(v)) return v;
  }
  throw Error(Errc::invalid_argument, std::string("unknown ") + what + " '" + text + "'");
}

constexpr RecordKind kKinds[] = {RecordKind::test, RecordKind::sweep, RecordKind::reeval,
                                 RecordKind::step};
constexpr Marker kMarkers[] = {Marker::none, Marker::star, Marker::accepted_worse,
                               Marker::rejected_worse};
constexpr Decision kDecisions[] = {Decision::improved, Decision::accepted_worse,
                                   Decision::rejected_worse, Decision::rejected_infeasible};

}  // namespace

std::string to_json_line(const TraceRecord &r) {
  // ordered_json keeps a fixed field order so traces are byte-reproducible.
  nlohmann::ordered_json j;
  j["kind"] = kind_name(r.kind);
  j["test_id"] = r.test_id;
  j["phase"] = r.phase;
  j["assignment"] = r.assignment;
  j["mean"] = r.mean;
  j["se"] = r.se;
  j["n_games"] = r.n_games;
  j["marker"] = marker_name(r.marker);
  if (r.cached) j["cached"] = true;
  if (r.element) j["element"] = *r.element;
  if (r.best_rank) j["best_rank"] = *r.best_rank;
  if (!r.inductions.empty()) {
    auto &notes = j["inductions"] = nlohmann::ordered_json::array();
    for (const auto &n : r.inductions) {
      nlohmann::ordered_json o;
      o["before"] = n.before;
      o["after"] = n.after;
      o["tests"] = {n.test_a, n.test_b};
      o["gap"] = n.gap;
      o["threshold"] = n.threshold;
      o["outcome"] = n.outcome;
      notes.push_back(std::move(o));
    }
  }
  if (r.temperature) j["temperature"] = *r.temperature;
  if (r.delta) j["delta"] = *r.delta;
  if (r.probability) j["probability"] = *r.probability;
  if (r.decision) j["decision"] = decision_name(*r.decision);
  if (r.violations) j["violations"] = *r.violations;
  return j.dump();
}

TraceRecord parse_trace_line(std::string_view line) {
  const json j = detail::parse_json(line, "trace record");
  TraceRecord r;
  try {
    r.kind = parse_enum(j.at("kind").get<std::string>(), kKinds, kind_name, "record kind");
    r.test_id = j.at("test_id").get<int>();
    r.phase = j.at("phase").get<int>();
    r.assignment = j.at("assignment").get<std::vector<ElementId>>();
    r.mean = j.at("mean").get<double>();
    r.se = j.at("se").get<double>();
    r.n_games = j.at("n_games").get<std::uint64_t>();
    r.marker = parse_enum(j.at("marker").get<std::string>(), kMarkers, marker_name, "marker");
    r.cached = j.value("cached", false);
    if (j.contains("element")) r.element = j.at("element").get<ElementId>();
    if (j.contains("best_rank")) r.best_rank = j.at("best_rank").get<std::size_t>();
    if (j.contains("inductions")) {
      for (const auto &o : j.at("inductions")) {
        InductionNote n;
        n.before = o.at("before").get<ElementId>();
        n.after = o.at("after").get<ElementId>();
        n.test_a = o.at("tests").at(0).get<int>();
        n.test_b = o.at("tests").at(1).get<int>();
        n.gap = o.at("gap").get<double>();
        n.threshold = o.at("threshold").get<double>();
        n.outcome = o.at("outcome").get<std::string>();
        r.inductions.push_back(std::move(n));
      }
    }
    if (j.contains("temperature")) r.temperature = j.at("temperature").get<double>();
    if (j.contains("delta")) r.delta = j.at("delta").get<double>();
    if (j.contains("probability")) r.probability = j.at("probability").get<double>();
    if (j.contains("decision")) {
      r.decision = parse_enum(j.at("decision").get<std::string>(), kDecisions, decision_name,
                              "decision");
    }
    if (j.contains("violations")) r.violations = j.at("violations").get<std::size_t>();
  } catch (const json::exception &e) {
    throw Error(Errc::invalid_argument, std::string("bad trace record: ") + e.what());
  }
  return r;
}

std::vector<TraceRecord> read_trace(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open trace " + path);
  std::vector<TraceRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(parse_trace_line(line));
  }
  return out;
}

std::string csv_header() {
  return "kind,test_id,phase,assignment,mean,se,n_games,marker,element,best_rank,"
         "inductions,temperature,delta,probability,decision,violations\n";
}

namespace {

// Shortest text that round-trips, same as the JSON lines.
std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string to_csv_row(const TraceRecord &r) {
  std::ostringstream out;
  out << kind_name(r.kind) << ',' << r.test_id << ',' << r.phase << ',';
  for (std::size_t i = 0; i < r.assignment.size(); ++i) out << (i ? " " : "") << r.assignment[i];
  out << ',' << num(r.mean) << ',' << num(r.se) << ',' << r.n_games << ','
      << marker_name(r.marker) << ',';
  if (r.element) out << *r.element;
  out << ',';
  if (r.best_rank) out << *r.best_rank;
  out << ',';
  for (std::size_t i = 0; i < r.inductions.size(); ++i) {
    const auto &n = r.inductions[i];
    const bool bracket = n.outcome == "not-induced";
    out << (i ? "; " : "") << (bracket ? "[" : "") << n.before << '<' << n.after
        << (bracket ? "]" : "") << ' ' << n.outcome;
  }
  out << ',';
  if (r.temperature) out << num(*r.temperature);
  out << ',';
  if (r.delta) out << num(*r.delta);
  out << ',';
  if (r.probability) out << num(*r.probability);
  out << ',';
  if (r.decision) out << decision_name(*r.decision);
  out << ',';
  if (r.violations) out << *r.violations;
  out << '\n';
  return out.str();
}

TraceWriter::TraceWriter(const std::string &path) : out_(path, std::ios::trunc) {
  if (!out_) throw Error(Errc::io, "cannot open trace output " + path);
}

void TraceWriter::write(const TraceRecord &r) {
  out_ << to_json_line(r) << '\n';
  out_.flush();
  if (!out_) throw Error(Errc::io, "trace write failed");
}

}  // namespace dca
