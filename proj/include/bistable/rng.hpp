#pragma once

#include <cstdint>
#include <random>

namespace bistable {

/// Mixes a base seed with a stream index (trial, hold window, node) into an
/// independent 64-bit seed. splitmix64 finalizer.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed, std::uint64_t index) {
  return Engine(derive_seed(seed, index));
}

}  // namespace bistable
