#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace mvgad {

std::uint64_t splitmix64(std::uint64_t x);

// Derives an independent seed for a named stage and run index from the root
// seed: splitmix64(splitmix64(root ^ fnv1a(stage)) + run).
std::uint64_t derive_seed(std::uint64_t root, std::string_view stage,
                          std::uint64_t run = 0);

// Seeded generator whose output sequence is identical on every platform.
// std::mt19937_64 is fully specified by the standard; the std distributions
// are not, so sampling is done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform in [0, n). n must be > 0.
  std::size_t uniform_index(std::size_t n);
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  bool bernoulli(double p) { return uniform() < p; }

  // Fisher-Yates permutation of [0, n).
  std::vector<std::size_t> permutation(std::size_t n);

  // Index drawn with probability proportional to weights (all >= 0). Falls
  // back to a uniform draw when the weights sum to zero.
  std::size_t weighted_index(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mvgad
