#pragma once

#include <cstdint>
#include <span>

namespace dbnmon {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// PCG32 generator. Every stochastic operation in the library takes one of
/// these explicitly; independent streams are obtained with split()/derive()
/// so that parallel trials stay reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    inc_ = (stream << 1u) | 1u;
    state_ = 0;
    next_u32();
    state_ += seed;
    next_u32();
  }

  std::uint32_t next_u32() {
    std::uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    std::uint32_t xorshifted =
        static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    std::uint32_t rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((-rot) & 31u));
  }

  std::uint64_t next_u64() {
    std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint32_t next_below(std::uint32_t bound) {
    std::uint32_t threshold = (-bound) % bound;
    for (;;) {
      std::uint32_t r = next_u32();
      if (r >= threshold) return r % bound;
    }
  }

  /// Index drawn proportional to the (nonnegative) weights. The caller
  /// supplies the weight total to avoid a second pass.
  std::size_t sample_weighted(std::span<const double> weights, double total) {
    double u = next_double() * total;
    double acc = 0.0;
    std::size_t last_positive = 0;
    bool seen = false;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0.0) continue;
      acc += weights[i];
      last_positive = i;
      seen = true;
      if (u < acc) return i;
    }
    (void)seen;
    return last_positive;  // u landed on accumulated rounding slack
  }

  std::size_t sample_weighted(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    return sample_weighted(weights, total);
  }

  /// Independent generator addressed by key; does not disturb this one.
  Rng split(std::uint64_t key) const {
    std::uint64_t x = state_ ^ (inc_ * 0x9e3779b97f4a7c15ULL) ^ key;
    std::uint64_t seed = splitmix64(x);
    std::uint64_t stream = splitmix64(x);
    return Rng(seed, stream);
  }

  /// Deterministic generator for (seed, key) without constructing a parent.
  static Rng derive(std::uint64_t seed, std::uint64_t key) {
    std::uint64_t x = seed ^ (key * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
    std::uint64_t s = splitmix64(x);
    std::uint64_t t = splitmix64(x);
    return Rng(s, t);
  }

 private:
  std::uint64_t state_ = 0;
  std::uint64_t inc_ = 1;
};

}  // namespace dbnmon
