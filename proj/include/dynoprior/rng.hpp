#pragma once

#include <cstdint>

namespace dyno {

/// SplitMix64 (Steele, Lea & Flood). Counter-style: the state advances by a
/// fixed odd constant per draw, so the n-th output is a pure function of
/// (seed, n) and sequences replay bit-identically on every platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1), 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  /// Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

 private:
  std::uint64_t state_;
};

/// Decorrelated seed for sub-stream `index` of a master seed, so parallel
/// work items (trajectories, sweep cells) draw independent sequences.
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t index) {
  SplitMix64 g(seed ^ (index * 0x9E3779B97F4A7C15ull + 0x1F123BB5159A55E5ull));
  return g.next_u64();
}

}  // namespace dyno
