#pragma once

#include <cstdint>
#include <random>

namespace hcls {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Uniform draw in [0, 1) that depends only on (key, counter). Used where the
/// result must not depend on iteration order or thread partitioning.
constexpr double counter_uniform(std::uint64_t key, std::uint64_t counter) noexcept {
  const std::uint64_t bits = mix64(key ^ mix64(counter));
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Derive an independent seed for a numbered sub-stream (replicate, chain, ...).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return mix64(seed * 0x2545F4914F6CDD1DULL + mix64(stream));
}

}  // namespace hcls
