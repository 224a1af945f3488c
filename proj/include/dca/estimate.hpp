#pragma once

#include <cstdint>
#include <span>

namespace dca {

// Sample mean, standard error and sample count of a noisy evaluation, in
// goal-difference units. Energy in the annealing sense is -mean.
struct FitnessEstimate {
  double mean = 0.0;
  double se = 0.0;
  std::uint64_t n_games = 1;
  // Set when se is 0 only because a single game was aggregated.
  bool single_game = false;
};

// mean, and sample sd (n - 1 divisor) / sqrt(n). Throws Error(empty_batch).
FitnessEstimate aggregate(std::span<const double> samples);

// |a.mean - b.mean| > tau * max(a.se, b.se). Throws on tau <= 0.
bool significant_difference(const FitnessEstimate &a, const FitnessEstimate &b,
                            double tau = 1.0);

inline double gate_threshold(const FitnessEstimate &a, const FitnessEstimate &b, double tau) {
  return tau * (a.se > b.se ? a.se : b.se);
}

}  // namespace dca
