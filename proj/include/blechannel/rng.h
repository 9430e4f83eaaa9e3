#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "blechannel/time.h"

namespace blechannel {

// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                                    std::uint64_t index = 0) {
  return mix_seed(mix_seed(seed ^ mix_seed(stream)) + index);
}

// Seeded generator whose derived variates do not depend on the standard
// library's distribution implementations, so traces are byte-identical across
// toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, bound] (inclusive), unbiased.
  std::uint64_t uniform_int(std::uint64_t bound) {
    if (bound == ~std::uint64_t{0}) return next();
    const std::uint64_t range = bound + 1;
    const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % range;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % range;
  }

  // Uniform duration in [lo, hi] at nanosecond resolution.
  Duration uniform_duration(Duration lo, Duration hi) {
    if (hi <= lo) return lo;
    return lo + Duration{static_cast<std::int64_t>(
                    uniform_int(static_cast<std::uint64_t>((hi - lo).count())))};
  }

  bool bernoulli(double p) { return p > 0.0 && uniform() < p; }

  double normal(double mean, double sigma) {
    if (sigma == 0.0) return mean;
    // Box-Muller; u1 in (0, 1].
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return mean + sigma * std::sqrt(-2.0 * std::log(u1)) *
                      std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace blechannel
