#pragma once

#include <cstdint>
#include <random>

namespace carleman {

// All randomness in the toolkit flows through mt19937_64 plus the explicit
// bit-to-double conversion below. std::uniform_real_distribution is
// implementation-defined, which would break byte-identical reports across
// standard libraries, so it is not used anywhere.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * unit_uniform(rng);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 step keeps per-task streams decorrelated under a single seed.
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace carleman
