#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dca {

std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

// Per-component seed: splitmix64(master ^ fnv1a64(label)). Labels used by the
// runner are "oracle", "proposer" and "acceptance".
std::uint64_t derive_seed(std::uint64_t master, std::string_view label) noexcept;

// Combines a seed with an extra word; order-sensitive.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t word) noexcept;

// mt19937_64 with fixed, portable conversions to doubles and bounded ints.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Standard normal via Box-Muller; one value per call, no caching.
  double gaussian();
  // Uniform on [0, n); n > 0.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace dca
