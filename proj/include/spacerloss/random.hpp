#pragma once

#include <cstdint>
#include <random>

namespace spacerloss {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used to derive independent stream seeds so that
/// results never depend on traversal or scheduling order.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// mix(seed, stream) = splitmix64(splitmix64(seed) ^ splitmix64(stream + golden)).
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

}  // namespace spacerloss
