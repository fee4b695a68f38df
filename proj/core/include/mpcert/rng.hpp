#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace mpcert {

/// 64-bit linear congruential generator, x <- a*x + c mod 2^64, with Knuth's
/// MMIX constants a = 6364136223846793005, c = 1442695040888963407.
/// Doubles take the top 53 bits of the state, so streams are bit-identical
/// on every platform.
class Lcg64 {
 public:
  static constexpr std::uint64_t kMultiplier = 6364136223846793005ULL;
  static constexpr std::uint64_t kIncrement = 1442695040888963407ULL;

  explicit Lcg64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ = state_ * kMultiplier + kIncrement;
    return state_;
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (one draw per call, second discarded).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace mpcert
