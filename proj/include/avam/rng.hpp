#pragma once

#include <cstdint>

namespace avam {

/// Independent seed streams derived from one run seed.
enum class SeedStream : std::uint64_t {
  kDemo = 1,
  kTrainEpisode = 2,
  kEvalEpisode = 3,
  kNetworkInit = 4,
  kAugment = 5,
  kSampler = 6,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, SeedStream stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(base) ^ static_cast<std::uint64_t>(stream)) ^ index);
}

}  // namespace avam
