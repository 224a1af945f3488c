#include "dca/oracle.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "dca/error.hpp"
#include "dca/rng.hpp"
#include "json_util.hpp"

namespace dca {

using detail::json;

double Landscape::weight(ElementId e) const {
  auto it = weights.find(e);
  return it == weights.end() ? 1.0 : it->second;
}

double Landscape::true_fitness(const Assignment &x) const {
  if (x.size() != target.size()) {
    throw Error(Errc::incompatible, "assignment size " + std::to_string(x.size()) +
                                        " does not match landscape size " +
                                        std::to_string(target.size()));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const auto rank = static_cast<double>(x.rank_of(target[i]).value);
    total += weight(target[i]) * std::fabs(rank - static_cast<double>(i + 1));
  }
  return total == 0.0 ? 0.0 : -total;
}

Landscape parse_landscape(std::string_view json_text) {
  const json doc = detail::parse_json(json_text, "landscape");
  detail::check_keys(doc, {"kind", "target", "weights", "sigma"}, "landscape");
  const auto kind = detail::get_or<std::string>(doc, "kind", "target", "landscape");
  if (kind != "target") throw Error(Errc::config, "unsupported landscape kind '" + kind + "'");
  Landscape out;
  out.target = detail::require<std::vector<ElementId>>(doc, "target", "landscape");
  Assignment(out.target);  // validates the permutation
  const auto weights = detail::get_or<std::vector<double>>(doc, "weights", {}, "landscape");
  if (!weights.empty()) {
    if (weights.size() != out.target.size()) {
      throw Error(Errc::config, "landscape.weights must align with landscape.target");
    }
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (!(weights[i] >= 0.0)) throw Error(Errc::config, "landscape weights must be >= 0");
      out.weights[out.target[i]] = weights[i];
    }
  }
  out.sigma = detail::get_or<double>(doc, "sigma", 0.0, "landscape");
  if (!(out.sigma >= 0.0)) throw Error(Errc::config, "landscape.sigma must be >= 0");
  return out;
}

std::string landscape_to_json(const Landscape &landscape) {
  json doc;
  doc["kind"] = "target";
  doc["target"] = landscape.target;
  std::vector<double> weights;
  for (ElementId e : landscape.target) weights.push_back(landscape.weight(e));
  doc["weights"] = weights;
  doc["sigma"] = landscape.sigma;
  return doc.dump();
}

FitnessEstimate evaluate_exact(const Landscape &landscape, const Assignment &x) {
  return FitnessEstimate{landscape.true_fitness(x), 0.0, 1, false};
}

FitnessEstimate ExactOracle::evaluate(const Assignment &x, std::uint64_t, std::uint64_t) {
  return evaluate_exact(landscape_, x);
}

FitnessEstimate SyntheticOracle::evaluate(const Assignment &x, std::uint64_t n_games,
                                          std::uint64_t seed) {
  if (n_games == 0) throw Error(Errc::invalid_argument, "n_games must be >= 1");
  const double mu = landscape_.true_fitness(x);
  Rng rng(mix_seed(mix_seed(seed, fnv1a64(x.to_string())), n_games));
  std::vector<double> samples(n_games);
  for (auto &s : samples) s = mu + landscape_.sigma * rng.gaussian();
  return aggregate(samples);
}

PoolOracle::PoolOracle(std::vector<Member> members) : members_(std::move(members)) {
  if (members_.empty()) throw Error(Errc::config, "opponent pool is empty");
  for (const auto &m : members_) {
    if (!m.oracle) throw Error(Errc::config, "pool member without an oracle");
    if (!(m.weight > 0.0)) throw Error(Errc::config, "pool weights must be > 0");
  }
}

FitnessEstimate combine_pool(const std::vector<std::pair<FitnessEstimate, double>> &parts) {
  if (parts.empty()) throw Error(Errc::config, "opponent pool is empty");
  double total = 0.0;
  for (const auto &[est, w] : parts) {
    if (!(w > 0.0)) throw Error(Errc::config, "pool weights must be > 0");
    total += w;
  }
  double mean = 0.0;
  double var = 0.0;
  std::uint64_t games = 0;
  for (const auto &[est, w] : parts) {
    const double share = w / total;
    mean += share * est.mean;
    var += share * share * est.se * est.se;
    games += est.n_games;
  }
  return FitnessEstimate{mean, std::sqrt(var), games, false};
}

FitnessEstimate PoolOracle::evaluate(const Assignment &x, std::uint64_t n_games,
                                     std::uint64_t seed) {
  std::vector<std::pair<FitnessEstimate, double>> parts;
  parts.reserve(members_.size());
  for (std::size_t k = 0; k < members_.size(); ++k) {
    parts.emplace_back(members_[k].oracle->evaluate(x, n_games, mix_seed(seed, k)),
                       members_[k].weight);
  }
  if (parts.size() == 1) return parts.front().first;
  return combine_pool(parts);
}

std::string PoolOracle::identity() const {
  std::string id = "pool(";
  for (std::size_t k = 0; k < members_.size(); ++k) {
    if (k) id += ',';
    std::ostringstream w;
    w << members_[k].weight;
    id += members_[k].oracle->identity() + "*" + w.str();
  }
  return id + ")";
}

std::vector<ReplayRecord> parse_replay_fixture(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line.rfind("# dca-replay v1", 0) != 0) {
    throw Error(Errc::config, "replay fixture must start with '# dca-replay v1'");
  }
  std::vector<ReplayRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream cols(line);
    while (std::getline(cols, field, '|')) fields.push_back(field);
    if (fields.size() != 4) {
      throw Error(Errc::config, "replay fixture line " + std::to_string(line_no) +
                                    ": expected 4 '|'-separated fields");
    }
    try {
      FitnessEstimate est{std::stod(fields[1]), std::stod(fields[2]),
                          std::stoull(fields[3]), false};
      out.push_back({Assignment::parse(fields[0]), est});
    } catch (const std::logic_error &) {
      throw Error(Errc::config,
                  "replay fixture line " + std::to_string(line_no) + ": bad number");
    }
  }
  if (out.empty()) throw Error(Errc::config, "replay fixture has no records");
  return out;
}

std::vector<ReplayRecord> load_replay_fixture(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open replay fixture " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_replay_fixture(buf.str());
}

ReplayOracle::ReplayOracle(std::vector<ReplayRecord> records, std::string name)
    : name_(std::move(name)) {
  if (records.empty()) throw Error(Errc::config, "replay fixture set is empty");
  for (auto &r : records) records_[r.assignment.to_string()].push_back(r.estimate);
}

FitnessEstimate ReplayOracle::evaluate(const Assignment &x, std::uint64_t n_games,
                                       std::uint64_t) {
  auto it = records_.find(x.to_string());
  if (it == records_.end()) {
    throw Error(Errc::replay_miss, "replay miss: no fixture record for '" + x.to_string() + "'");
  }
  const FitnessEstimate *best = nullptr;
  std::uint64_t best_distance = std::numeric_limits<std::uint64_t>::max();
  for (const auto &est : it->second) {
    const std::uint64_t d = est.n_games > n_games ? est.n_games - n_games : n_games - est.n_games;
    if (d < best_distance) {
      best_distance = d;
      best = &est;
    }
  }
  return *best;
}

FitnessEstimate CachedOracle::evaluate(const Assignment &x, std::uint64_t n_games,
                                       std::uint64_t seed) {
  auto key = std::make_pair(x.to_string(), n_games);
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) {
      ++hits_;
      return it->second;
    }
  }
  // Evaluated outside the lock; a concurrent duplicate keeps the first value.
  auto est = inner_->evaluate(x, n_games, seed);
  std::lock_guard lock(mutex_);
  auto [it, inserted] = cache_.emplace(std::move(key), est);
  if (inserted) ++misses_; else ++hits_;
  return it->second;
}

bool CachedOracle::contains(const Assignment &x, std::uint64_t n_games) const {
  std::lock_guard lock(mutex_);
  return cache_.count({x.to_string(), n_games}) > 0;
}

std::size_t CachedOracle::hits() const {
  std::lock_guard lock(mutex_);
  return hits_;
}

std::size_t CachedOracle::misses() const {
  std::lock_guard lock(mutex_);
  return misses_;
}

namespace {

std::filesystem::path resolve(const std::filesystem::path &base, const std::string &p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::string read_text(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::shared_ptr<Oracle> build(const json &spec, const std::filesystem::path &base) {
  const auto kind = detail::require<std::string>(spec, "kind", "oracle");
  if (kind == "exact" || kind == "synthetic") {
    detail::check_keys(spec, {"kind", "landscape", "landscape_file"}, "oracle");
    Landscape landscape;
    if (spec.contains("landscape")) {
      landscape = parse_landscape(spec.at("landscape").dump());
    } else if (spec.contains("landscape_file")) {
      landscape = parse_landscape(
          read_text(resolve(base, detail::require<std::string>(spec, "landscape_file", "oracle"))));
    } else {
      throw Error(Errc::config, "oracle '" + kind + "' needs 'landscape' or 'landscape_file'");
    }
    if (kind == "exact") return std::make_shared<ExactOracle>(std::move(landscape));
    return std::make_shared<SyntheticOracle>(std::move(landscape));
  }
  if (kind == "replay") {
    detail::check_keys(spec, {"kind", "fixtures"}, "oracle");
    const auto files = detail::require<std::vector<std::string>>(spec, "fixtures", "oracle");
    std::vector<ReplayRecord> records;
    for (const auto &f : files) {
      auto part = load_replay_fixture(resolve(base, f));
      records.insert(records.end(), part.begin(), part.end());
    }
    return std::make_shared<ReplayOracle>(std::move(records));
  }
  if (kind == "subprocess") {
    detail::check_keys(spec, {"kind", "command", "timeout_ms", "workers"}, "oracle");
    SubprocessOracle::Options opts;
    opts.command = detail::require<std::vector<std::string>>(spec, "command", "oracle");
    opts.timeout = std::chrono::milliseconds(
        detail::get_or<std::int64_t>(spec, "timeout_ms", 60000, "oracle"));
    opts.max_children = detail::get_or<std::size_t>(spec, "workers", 1, "oracle");
    return std::make_shared<SubprocessOracle>(std::move(opts));
  }
  if (kind == "pool") {
    detail::check_keys(spec, {"kind", "members"}, "oracle");
    const auto &members = spec.at("members");
    if (!members.is_array() || members.empty()) {
      throw Error(Errc::config, "opponent pool is empty");
    }
    std::vector<PoolOracle::Member> out;
    for (const auto &m : members) {
      detail::check_keys(m, {"weight", "oracle"}, "pool member");
      out.push_back({build(m.at("oracle"), base),
                     detail::require<double>(m, "weight", "pool member")});
    }
    return std::make_shared<PoolOracle>(std::move(out));
  }
  throw Error(Errc::config, "unknown oracle kind '" + kind + "'");
}

}  // namespace

std::shared_ptr<Oracle> make_oracle(std::string_view spec_json,
                                    const std::filesystem::path &base_dir) {
  return build(detail::parse_json(spec_json, "oracle"), base_dir);
}

}  // namespace dca
