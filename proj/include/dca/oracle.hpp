#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "dca/assignment.hpp"
#include "dca/estimate.hpp"

namespace dca {

// The evaluation boundary. Implementations must be callable concurrently.
class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual FitnessEstimate evaluate(const Assignment &x, std::uint64_t n_games,
                                   std::uint64_t seed) = 0;
  // Stable name used in cache keys and traces.
  virtual std::string identity() const = 0;
};

// Hidden-target landscape: mu(x) = -sum_e w_e * |rank_of(x, e) - rank_of(target, e)|.
struct Landscape {
  std::vector<ElementId> target;
  std::map<ElementId, double> weights;  // missing element -> weight 1
  double sigma = 0.0;                   // per-game noise sd

  double true_fitness(const Assignment &x) const;
  double weight(ElementId e) const;
  std::size_t size() const noexcept { return target.size(); }
};

// Parses {"kind":"target","target":[...],"weights":[...],"sigma":s}; weights
// align with `target` and default to 1. Unknown keys are errors.
Landscape parse_landscape(std::string_view json_text);
std::string landscape_to_json(const Landscape &landscape);

class ExactOracle final : public Oracle {
 public:
  explicit ExactOracle(Landscape landscape) : landscape_(std::move(landscape)) {}
  FitnessEstimate evaluate(const Assignment &x, std::uint64_t n_games,
                           std::uint64_t seed) override;
  std::string identity() const override { return "exact"; }
  const Landscape &landscape() const noexcept { return landscape_; }

 private:
  Landscape landscape_;
};

FitnessEstimate evaluate_exact(const Landscape &landscape, const Assignment &x);

// true_fitness(x) + N(0, sigma) per game, reproducible per (seed, x, n_games).
class SyntheticOracle final : public Oracle {
 public:
  explicit SyntheticOracle(Landscape landscape) : landscape_(std::move(landscape)) {}
  FitnessEstimate evaluate(const Assignment &x, std::uint64_t n_games,
                           std::uint64_t seed) override;
  std::string identity() const override { return "synthetic"; }
  const Landscape &landscape() const noexcept { return landscape_; }

 private:
  Landscape landscape_;
};

// Weighted average over opponents: mean = sum w_k m_k / W,
// se = sqrt(sum (w_k / W)^2 se_k^2).
class PoolOracle final : public Oracle {
 public:
  struct Member {
    std::shared_ptr<Oracle> oracle;
    double weight = 1.0;
  };
  explicit PoolOracle(std::vector<Member> members);
  FitnessEstimate evaluate(const Assignment &x, std::uint64_t n_games,
                           std::uint64_t seed) override;
  std::string identity() const override;

 private:
  std::vector<Member> members_;
};

// Combines already computed member estimates with the pool formula.
FitnessEstimate combine_pool(const std::vector<std::pair<FitnessEstimate, double>> &parts);

struct ReplayRecord {
  Assignment assignment;
  FitnessEstimate estimate;
};

// `# dca-replay v1` header, then `<ints> | <mean> | <se> | <n>` per line.
std::vector<ReplayRecord> parse_replay_fixture(std::string_view text);
std::vector<ReplayRecord> load_replay_fixture(const std::filesystem::path &path);

// Looks estimates up by assignment; a miss is a hard error. When an assignment
// has several records, the one whose n is closest to the request wins.
class ReplayOracle final : public Oracle {
 public:
  explicit ReplayOracle(std::vector<ReplayRecord> records, std::string name = "replay");
  FitnessEstimate evaluate(const Assignment &x, std::uint64_t n_games,
                           std::uint64_t seed) override;
  std::string identity() const override { return name_; }
  std::size_t size() const noexcept { return records_.size(); }

 private:
  std::string name_;
  std::map<std::string, std::vector<FitnessEstimate>> records_;
};

// Line-delimited JSON exchange with child processes:
//   -> {"assignment":[...],"games":N,"seed":S}
//   <- {"mean":M,"se":E,"n":N}
class SubprocessOracle final : public Oracle {
 public:
  struct Options {
    std::vector<std::string> command;  // argv; command[0] resolved via PATH
    std::chrono::milliseconds timeout{60000};
    std::size_t max_children = 1;
  };
  explicit SubprocessOracle(Options options);
  ~SubprocessOracle() override;
  SubprocessOracle(const SubprocessOracle &) = delete;
  SubprocessOracle &operator=(const SubprocessOracle &) = delete;

  FitnessEstimate evaluate(const Assignment &x, std::uint64_t n_games,
                           std::uint64_t seed) override;
  std::string identity() const override;

 private:
  struct Child;
  std::unique_ptr<Child> acquire();
  void release(std::unique_ptr<Child> child);

  Options options_;
  std::mutex mutex_;
  std::condition_variable available_;
  std::vector<std::unique_ptr<Child>> idle_;
  std::size_t live_ = 0;
};

std::string make_request_line(const Assignment &x, std::uint64_t n_games, std::uint64_t seed);
// Throws Error(oracle_io) carrying the raw payload on malformed input.
FitnessEstimate parse_response_line(std::string_view line);

// Memoises estimates per (oracle identity, assignment, n_games).
class CachedOracle final : public Oracle {
 public:
  explicit CachedOracle(std::shared_ptr<Oracle> inner) : inner_(std::move(inner)) {}
  FitnessEstimate evaluate(const Assignment &x, std::uint64_t n_games,
                           std::uint64_t seed) override;
  std::string identity() const override { return inner_->identity(); }

  bool contains(const Assignment &x, std::uint64_t n_games) const;
  std::size_t hits() const;
  std::size_t misses() const;

 private:
  std::shared_ptr<Oracle> inner_;
  mutable std::mutex mutex_;
  std::map<std::pair<std::string, std::uint64_t>, FitnessEstimate> cache_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

// Builds an oracle from a JSON spec:
//   {"kind":"exact"|"synthetic","landscape":{...} | "landscape_file":path}
//   {"kind":"replay","fixtures":[path,...]}
//   {"kind":"subprocess","command":[...],"timeout_ms":T,"workers":K}
//   {"kind":"pool","members":[{"weight":w,"oracle":{...}},...]}
// Relative paths resolve against base_dir.
std::shared_ptr<Oracle> make_oracle(std::string_view spec_json,
                                    const std::filesystem::path &base_dir);

}  // namespace dca
