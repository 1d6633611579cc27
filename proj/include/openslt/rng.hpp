#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace openslt {

/// Deterministic pseudorandom stream. All randomness in the library flows
/// through this wrapper so results are reproducible bit-for-bit from a seed;
/// independent streams are derived from (seed, label) pairs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(mix(seed)) {}

  std::uint64_t next() { return gen_(); }

  /// Uniform double in [0, 1) built from the top 53 bits of the stream.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (no reliance on unspecified
  /// std::normal_distribution internals).
  double gauss() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  /// Child stream keyed by an integer label; distinct labels give
  /// independent, reproducible streams.
  Rng derive(std::uint64_t label) const { return Rng(mix(seed_ ^ mix(label, 0x632be59bd9b4e019ull))); }

  std::uint64_t seed() const { return seed_; }

 private:
  static std::uint64_t mix(std::uint64_t x, std::uint64_t salt = 0) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ull + salt;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  std::uint64_t seed_;
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace openslt
