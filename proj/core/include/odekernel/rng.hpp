#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace odekernel {

/// splitmix64 PRNG. Chosen over std::mt19937 + std::normal_distribution so
/// that streams are bit-identical across standard library implementations;
/// the generation algorithm is part of every dataset's metadata.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal draw via Box-Muller, cosine branch only. Each draw
  /// consumes exactly two uniforms, keeping streams easy to reason about.
  double next_normal() {
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double next_normal(double mean, double stddev) {
    return mean + stddev * next_normal();
  }

  /// Uniform integer in [0, bound) by rejection-free modulo (bound << 2^64,
  /// bias is negligible for the window counts used here).
  std::uint64_t next_below(std::uint64_t bound) { return next_u64() % bound; }

 private:
  std::uint64_t state_;
};

inline const char* rng_algorithm_id() { return "splitmix64+box-muller-cos"; }

}  // namespace odekernel
