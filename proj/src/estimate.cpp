#include "dca/estimate.hpp"

#include <cmath>

#include "dca/error.hpp"

namespace dca {

FitnessEstimate aggregate(std::span<const double> samples) {
  if (samples.empty()) throw Error(Errc::empty_batch, "cannot aggregate an empty batch");
  const auto n = samples.size();
  double sum = 0.0;
  for (double s : samples) sum += s;
  const double mean = sum / static_cast<double>(n);
  FitnessEstimate est{mean, 0.0, n, n == 1};
  if (n > 1) {
    double ss = 0.0;
    for (double s : samples) ss += (s - mean) * (s - mean);
    est.se = std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
  }
  return est;
}

bool significant_difference(const FitnessEstimate &a, const FitnessEstimate &b, double tau) {
  if (!(tau > 0.0)) throw Error(Errc::invalid_argument, "gate multiplier must be > 0");
  return std::fabs(a.mean - b.mean) > gate_threshold(a, b, tau);
}

}  // namespace dca
