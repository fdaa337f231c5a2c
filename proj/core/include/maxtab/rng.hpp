#pragma once

#include <cstdint>
#include <random>

namespace maxtab {

// splitmix64 step; used to derive independent streams from one user seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return mix_seed(mix_seed(a) ^ b);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix_seed(mix_seed(a, b) ^ c);
}

inline std::mt19937_64 make_rng(std::uint64_t seed) {
  return std::mt19937_64(mix_seed(seed));
}

// Stream tags so that e.g. jitter, sampling chains and subsampling never
// share a generator state even under the same user seed.
enum class Stream : std::uint64_t {
  jitter = 1,
  gaussian_draw = 2,
  chain = 3,
  epoch_score = 4,
  selection = 5,
  subsample = 6,
  indistinguishability = 7,
  dcr = 8,
  resample = 9,
};

inline std::mt19937_64 make_rng(std::uint64_t seed, Stream s, std::uint64_t k = 0) {
  return std::mt19937_64(mix_seed(seed, static_cast<std::uint64_t>(s), k));
}

}  // namespace maxtab
