#pragma once

// Portable random helpers. std::mt19937_64 is fully specified by the
// standard, the <random> distributions are not, so the transforms live here
// to keep generated corpora and trained models identical across toolchains.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <utility>

namespace csisense::rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Child seed for stream `index` of `master`. Distinct indices give distinct seeds.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master + index * 0x9E3779B97F4A7C15ULL);
}

using Engine = std::mt19937_64;

/// Uniform in [0, 1) with 53 random bits.
inline double uniform01(Engine &eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline double uniform(Engine &eng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(eng);
}

/// Standard normal via Box-Muller (one draw per call, the sine branch is discarded).
inline double normal(Engine &eng) {
  double u1 = uniform01(eng);
  while (u1 <= 0.0) u1 = uniform01(eng);
  const double u2 = uniform01(eng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Uniform integer in [0, n). Rejection sampling, no modulo bias.
inline std::uint64_t below(Engine &eng, std::uint64_t n) {
  const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n);
  std::uint64_t x = eng();
  while (x >= limit) x = eng();
  return x % n;
}

template <typename T>
void shuffle(std::span<T> items, Engine &eng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(below(eng, i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

}  // namespace csisense::rng
