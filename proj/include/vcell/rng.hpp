#pragma once

#include <cstdint>
#include <random>

namespace vcell {

using Rng = std::mt19937_64;

// Independent generator streams used across the project. Each consumer
// derives its own seed from the run seed so that adding a draw in one place
// never shifts the sequence seen by another.
enum class Stream : std::uint64_t {
  Drop = 1,
  Channel = 2,
  Agents = 3,
  Register = 4,
  Baseline = 5,
  Genie = 6,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t a = 0,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ (b + 0x5851F42D4C957F2DULL));
  h = splitmix64(h ^ (c + 0x14057B7EF767814FULL));
  return h;
}

inline Rng make_rng(std::uint64_t seed, Stream stream, std::uint64_t a = 0, std::uint64_t b = 0,
                    std::uint64_t c = 0) {
  return Rng(derive_seed(seed, stream, a, b, c));
}

}  // namespace vcell
