#pragma once

#include <cstdint>
#include <random>

namespace geointent {

/// Seeded random source. Callers own their instance exclusively.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer; mixes a master seed with a stream index so that any
/// single trajectory or split can be regenerated on its own.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double normal(Rng& rng, double sigma) {
  return sigma * std::normal_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace geointent
