#pragma once

#include <cstdint>
#include <random>

namespace latmdp {

/// splitmix64 finalizer; used to derive well-separated RNG substreams from a
/// single experiment seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t substream(std::uint64_t seed, std::uint64_t tag) {
  return mix_seed(seed ^ mix_seed(tag));
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t tag = 0) {
  return std::mt19937_64(substream(seed, tag));
}

}  // namespace latmdp
