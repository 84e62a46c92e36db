#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fedra {

using Rng = std::mt19937_64;

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Child seed for a (master, key...) path. Streams derived this way are
// independent of the order in which they are requested.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(master);
  for (std::uint64_t k : path) h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

inline Rng make_rng(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  return Rng(derive_seed(master, path));
}

// Stream tags.
namespace stream {
inline constexpr std::uint64_t kSetup = 1;
inline constexpr std::uint64_t kSampling = 2;
inline constexpr std::uint64_t kClient = 3;
inline constexpr std::uint64_t kVerify = 4;
}  // namespace stream

}  // namespace fedra
