#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace narrative {

// Deterministic, platform-independent randomness. All seeded behavior in the
// pipeline (tie-breaking, shuffles, dropout, weight init) goes through this
// generator so results are bit-stable across compilers and standard libraries.

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

/// Seed for a keyed sub-stream, stable under reordering of the keys.
inline constexpr std::uint64_t derive_seed(std::string_view key,
                                           std::uint64_t seed) {
  return fnv1a64(key) ^ splitmix64(seed);
}

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [0, n); n must be positive. Rejection sampling, no
  /// modulo bias.
  std::size_t uniform_index(std::size_t n) {
    const std::uint64_t bound = ~0ull - ~0ull % n;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= bound);
    return static_cast<std::size_t>(x % n);
  }

  /// Uniform double in [0, 1).
  double uniform_real() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform_real(double lo, double hi) {
    return lo + uniform_real() * (hi - lo);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      using std::swap;
      swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace narrative
