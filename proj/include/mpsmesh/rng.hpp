#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mpsmesh {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Derives an independent stream seed, e.g. hash_seed({global, i, j}).
inline std::uint64_t hash_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x6A09E667F3BCC909ull;
  for (auto p : parts) h = splitmix64(h ^ splitmix64(p));
  return h;
}

// mt19937_64 with a platform-independent mapping to doubles (the standard
// distributions are implementation-defined, which breaks golden files).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : eng_(splitmix64(seed)) {}

  std::uint64_t next() { return eng_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace mpsmesh
