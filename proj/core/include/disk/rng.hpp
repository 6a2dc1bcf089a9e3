#pragma once

#include <cstdint>
#include <random>

namespace disk {

using Rng = std::mt19937_64;

// splitmix64 finalizer over (seed, stream): independent child seeds without
// any shared generator state.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  return Rng(derive_seed(seed, stream));
}

// Stream tags, so call sites never collide.
namespace streams {
inline constexpr std::uint64_t kB0 = 1;
inline constexpr std::uint64_t kMask = 2;
inline constexpr std::uint64_t kQueries = 3;
inline constexpr std::uint64_t kPhantom = 4;
inline constexpr std::uint64_t kInit = 5;
inline constexpr std::uint64_t kShuffle = 6;
inline constexpr std::uint64_t kStep = 7;
inline constexpr std::uint64_t kEval = 8;
}  // namespace streams

}  // namespace disk
