#pragma once

#include <cstdint>
#include <random>

namespace cfsg {

// SplitMix64 finalizer. Good avalanche, so adjacent inputs land on
// well-separated engine seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Child seed for work item `index` under `parent`. Chained to build the
// master -> topology -> channel-draw tree; every parallel work item owns an
// engine seeded from its tree node, so results are independent of thread
// count and scheduling.
inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
  return mix64(parent ^ mix64(index + 0x51ed2701ULL));
}

// Stream tags keep sibling uses of one parent seed from colliding.
inline constexpr std::uint64_t kStreamTopology = 0x746f706fULL;
inline constexpr std::uint64_t kStreamChannel = 0x6368616eULL;
inline constexpr std::uint64_t kStreamSmallCell = 0x73636c6cULL;

inline std::mt19937_64 make_engine(std::uint64_t seed) {
  return std::mt19937_64(seed);
}

}  // namespace cfsg
