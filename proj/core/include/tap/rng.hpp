#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace tap {

// 64-bit FNV-1a. Used for stable string hashing (feature tags, config digests,
// stream labels). Stable across platforms and runs.
inline constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// splitmix64 finalizer; decorrelates structured inputs before seeding.
inline constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ mix64(b));
}

// Derives an independent generator from a base seed, a stream label, and up to
// two indices. Every random decision in the pipeline draws from a generator
// keyed this way, so any slice of the work (one iteration, one sample, one
// batch slot) can be reproduced in isolation.
inline std::mt19937_64 derive_rng(std::uint64_t seed, std::string_view stream,
                                  std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t k = mix64(seed, fnv1a64(stream));
  k = mix64(k, a);
  k = mix64(k, b);
  return std::mt19937_64(k);
}

// Distribution helpers with pinned algorithms. The standard library's
// distribution objects are implementation-defined; these are not, so outputs
// are reproducible across toolchains.
inline double uniform_double(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n) by rejection; n must be positive.
inline std::uint64_t uniform_index(std::mt19937_64& g, std::uint64_t n) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = g();
  } while (x >= limit);
  return x % n;
}

// Standard normal via Box-Muller (one value per call; no cached state so the
// draw count stays predictable).
inline double normal_double(std::mt19937_64& g) {
  double u1 = 0.0;
  do {
    u1 = uniform_double(g);
  } while (u1 <= 0.0);
  const double u2 = uniform_double(g);
  constexpr double two_pi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

}  // namespace tap
