#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace fashionista {

/// Seeded random source used everywhere reproducibility matters.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The standard *distributions* are not portable, so the
/// conversions below are written out explicitly:
///   uniform()      53 high bits of one draw, scaled to [0, 1)
///   below(n)       rejection sampling on the top of the 64-bit range
///   normal()       Box-Muller, cosine branch only (one draw pair per value)
/// Any language with MT19937-64 can reproduce a corpus from these rules.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fashionista
