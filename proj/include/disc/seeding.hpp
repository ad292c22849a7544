#pragma once

#include <cstdint>
#include <random>

namespace disc {

using Rng = std::mt19937_64;

/// Independent random streams within one trial.
enum class Stream : std::uint64_t {
  Environment = 1,
  Contexts = 2,
  Noise = 3,
  Zeta = 4,
  Schedule = 5,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Stable seed for (master, trial, purpose, agent). Agent is ignored for
/// trial-wide streams by passing 0.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial, Stream purpose,
                                 std::uint64_t agent = 0) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ trial);
  h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
  h = splitmix64(h ^ agent);
  return h;
}

inline Rng make_rng(std::uint64_t master, std::uint64_t trial, Stream purpose, std::uint64_t agent = 0) {
  return Rng(derive_seed(master, trial, purpose, agent));
}

}  // namespace disc
