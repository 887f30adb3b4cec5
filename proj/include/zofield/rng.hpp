#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace zofield {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Stable replica-seed derivation: replica i of a run with master seed s uses
// the stream seeded with splitmix64(s XOR 0x9E3779B97F4A7C15 * (i + 1)).
// This is part of the reproducibility contract; results quote (seed, replica).
inline std::uint64_t replica_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
}

// mt19937_64 with explicit value mappings. The raw generator is pinned by the
// standard; the mappings below replace the implementation-defined
// std::*_distribution adaptors so that streams are identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t bits() { return gen_(); }

  // uniform on [0,1), 53-bit resolution
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  // Box-Muller, one fresh pair of uniforms per call
  double gaussian() {
    double u1 = uniform01();
    while (u1 == 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace zofield
