#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace bhpp {

/// splitmix64 finalizer. Used only to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_name(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seed of the named substream `name`, index `index`, under a root seed.
/// Every consumer of randomness derives its own stream so results do not
/// depend on call order or thread count.
constexpr std::uint64_t stream_seed(std::uint64_t root, std::string_view name, std::uint64_t index = 0) {
  return mix64(mix64(root ^ hash_name(name)) + index);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t root, std::string_view name, std::uint64_t index = 0) {
  return Rng{stream_seed(root, name, index)};
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace bhpp
