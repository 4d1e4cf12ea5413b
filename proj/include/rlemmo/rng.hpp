#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace rlemmo {

/// Mixes a base seed with a list of stream coordinates (generation, index, ...)
/// into an independent 64-bit seed. SplitMix64 finalizer per coordinate.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> coords);

/// Thin wrapper around mt19937_64 with the draws the optimizer needs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal(double mean, double stddev) { return std::normal_distribution<double>(mean, stddev)(engine_); }
  // Uniform integer in [0, n).
  int index(int n) { return std::uniform_int_distribution<int>(0, n - 1)(engine_); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rlemmo
