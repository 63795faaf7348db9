#pragma once

#include <cstdint>

namespace kqg::rng {

// splitmix64: counter-based 64-bit mixer (Vigna / Java SplittableRandom).
// Used everywhere randomness is needed so that draws are a pure function of
// (seed, stream indices) and reproducible across runs and thread schedules.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t seed, std::uint64_t a) {
  return splitmix64(splitmix64(seed) ^ a);
}

inline std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix64(mix(seed, a) ^ b);
}

inline std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                         std::uint64_t c) {
  return splitmix64(mix(seed, a, b) ^ c);
}

/// Uniform double in (0,1]; the open lower end keeps log() finite in Box-Muller.
double uniform(std::uint64_t key);

/// Standard normal via Box-Muller on two splitmix64 substreams of `key`.
double gaussian(std::uint64_t key);

}  // namespace kqg::rng
