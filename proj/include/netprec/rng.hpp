#pragma once

#include <bit>
#include <cstdint>

#include "netprec/gaussian.hpp"

namespace netprec {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer: a cheap bijective bit mix with full avalanche.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stable hash used to derive independent sub-stream seeds from a master seed
// and a list of integer tags (sample size, replication index, ...).
inline std::uint64_t seed_combine(std::uint64_t h, std::uint64_t v) {
  return mix64(h ^ (mix64(v + kGolden) + (h << 6) + (h >> 2)));
}

inline std::uint64_t seed_combine(std::uint64_t h, double v) {
  return seed_combine(h, std::bit_cast<std::uint64_t>(v));
}

// Counter-based pseudo-random generator: draw i of stream s is
// mix64(s + (i+1) * golden). Any draw is reproducible without replaying the
// sequence, and distinct seeds give effectively independent streams. Output
// is platform-independent: only integer arithmetic and the rational
// normal-quantile approximation are involved.
class CounterRng {
public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64() { return mix64(seed_ + (++counter_) * kGolden); }

  // Uniform on the open interval (0,1); 53-bit resolution, never 0 or 1.
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via the inverse-CDF transform.
  double next_normal() { return inverse_normal_cdf(next_uniform()); }

  // Uniform integer in [0, bound). Modulo bias is below 2^-53 for the bounds
  // used here (fold and index shuffles).
  std::uint64_t next_below(std::uint64_t bound) { return next_u64() % bound; }

private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace netprec
