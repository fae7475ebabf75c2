#pragma once

#include <cstdint>
#include <random>

namespace ewhflex {

// SplitMix64 finalizer; good avalanche, cheap, stable across platforms.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed for replication r derived from the master seed by a counter scheme:
// seed_r = mix64(master + (r+1) * golden). Replications can therefore be
// produced in any order (or in parallel) with identical results.
inline std::uint64_t replication_seed(std::uint64_t master_seed, std::uint64_t replication) {
  return mix64(master_seed + (replication + 1) * 0x9e3779b97f4a7c15ULL);
}

// Uniform double in [0, 1) from the top 53 bits of the generator output.
// Hand-rolled instead of std::uniform_real_distribution so streams are
// identical across standard-library implementations.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform in [lo, hi]. Always consumes one draw, even when lo == hi, so the
// stream stays aligned when a parameter range collapses to a point.
inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
  const double u = uniform01(rng);
  return lo + u * (hi - lo);
}

}  // namespace ewhflex
