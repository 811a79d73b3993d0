#ifndef FFM_RANDOM_HPP
#define FFM_RANDOM_HPP

/** @file
 * Reproducible random streams.
 *
 * A master seed is split into independent per-task streams with SplitMix64:
 * stream k is seeded with mix(master + (k + 1) * golden_gamma), and that seed
 * initializes a std::mt19937_64.  Work unit k therefore sees the same draws
 * regardless of which thread runs it or in which order.
 */

#include <cstdint>
#include <random>

namespace ffm {

/// SplitMix64 finalizer.
inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

/// Seed of stream `index` derived from `master`.
inline constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(master + (index + 1) * kGoldenGamma);
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed) { return Engine(mix64(seed)); }

inline Engine make_stream(std::uint64_t master, std::uint64_t index) {
  return Engine(stream_seed(master, index));
}

}  // namespace ffm

#endif  // FFM_RANDOM_HPP
