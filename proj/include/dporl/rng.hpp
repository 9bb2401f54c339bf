#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace dporl {

// All randomness in the library flows through one engine type so that a run
// is reproducible from its seed within a given standard library.
using Rng = std::mt19937_64;

// splitmix64 step (Vigna). Used both to mix multi-part seeds and to decorrelate
// sibling streams derived from the same master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Mixing function for derived seeds: fold each part through splitmix64.
// mix_seed({master, cell, rep}) is stable under appending new parts elsewhere,
// so adding algorithms or grid cells never shifts existing streams.
inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x8f1bbcdcbfa53e0bULL;
  for (std::uint64_t p : parts) h = splitmix64(h ^ p);
  return h;
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace dporl
