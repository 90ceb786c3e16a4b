#pragma once

#include <cstdint>
#include <random>

namespace flr {

/// Derives independent substream seeds from a master seed and integer tags
/// (splitmix64 finalizer chained over the tags). Replications keyed by
/// (master, n, rep) get the same stream no matter which worker thread or
/// execution order picks them up.
std::uint64_t substream_seed(std::uint64_t master, std::uint64_t tag0,
                             std::uint64_t tag1 = 0, std::uint64_t tag2 = 0);

/// Seeded random stream with the sampling maps spelled out here rather
/// than taken from <random> distributions, whose output sequences the
/// standard leaves unspecified. Same seed, same draws, everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// Uniform on [0,1) with 53 random bits.
  double uniform01();

  /// Standard normal via Box-Muller; the sine partner is cached.
  double normal();

  /// Uniform on [-sqrt(3), sqrt(3)]: mean zero, variance one.
  double scaled_uniform();

  /// Laplace scaled to unit variance (density b=1/sqrt(2)).
  double scaled_laplace();

 private:
  std::mt19937_64 eng_;
  double cached_normal_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace flr
