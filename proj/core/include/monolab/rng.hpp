#pragma once

#include <cstdint>
#include <cmath>

namespace monolab {

// Deterministic, platform-independent random streams. Every experiment
// derives one stream per (seed, trial) pair so trials can run in any
// order, or in parallel, and still reproduce byte-identical output.
// std::* distributions are deliberately avoided: their sequences are
// implementation-defined and would break cross-toolchain reproducibility.

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t trial = 0, std::uint64_t salt = 0) {
    std::uint64_t k = mix64(seed ^ mix64(trial ^ mix64(salt)));
    for (auto& w : s_) {
      k += 0x9E3779B97F4A7C15ull;
      w = mix64(k);
    }
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }

  // xoshiro256++
  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // uniform on [0,1) with 53 random bits
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // uniform integer in [0, m)
  std::uint64_t uniform_index(std::uint64_t m) {
    // multiply-shift; bias is negligible for the small m used here
    return static_cast<std::uint64_t>((static_cast<__uint128_t>(next_u64()) * m) >> 64);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Box-Muller; keeps the spare value so consecutive draws are cheap
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace monolab
