#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace oed {

// All randomness in the library flows from a single master seed through
// named derived streams, so scenario j is identical no matter which thread
// materializes it or what else ran before.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_name(std::string_view name) {
  // FNV-1a
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Derive a stream seed from (master, stream name, index).
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view stream,
                                 std::uint64_t index = 0) {
  std::uint64_t s = splitmix64(master ^ hash_name(stream));
  return splitmix64(s ^ splitmix64(index));
}

inline std::mt19937_64 make_engine(std::uint64_t master, std::string_view stream,
                                   std::uint64_t index = 0) {
  return std::mt19937_64(derive_seed(master, stream, index));
}

}  // namespace oed
