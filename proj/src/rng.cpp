#include "flr/rng.hpp"

#include <cmath>
#include <numbers>

namespace flr {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t master, std::uint64_t tag0,
                             std::uint64_t tag1, std::uint64_t tag2) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ tag0);
  h = splitmix64(h ^ tag1);
  h = splitmix64(h ^ tag2);
  return h;
}

double Rng::uniform01() {
  return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (have_cached_) {
    have_cached_ = false;
    return cached_normal_;
  }
  double u1 = uniform01();
  while (u1 == 0.0) u1 = uniform01();
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  have_cached_ = true;
  return radius * std::cos(angle);
}

double Rng::scaled_uniform() {
  return std::numbers::sqrt3 * (2.0 * uniform01() - 1.0);
}

double Rng::scaled_laplace() {
  // Inverse CDF; variance 2b^2 = 1 with b = 1/sqrt(2).
  const double u = uniform01() - 0.5;
  const double b = 1.0 / std::numbers::sqrt2;
  const double mag = -b * std::log(1.0 - 2.0 * std::abs(u));
  return u >= 0.0 ? mag : -mag;
}

}  // namespace flr
