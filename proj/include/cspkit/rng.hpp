#pragma once

#include <cstdint>
#include <random>

namespace cspkit {

// Seeded RNG wrapper with fixed-width helpers. All randomized operations in
// the library draw through this class only, so a (seed, call-sequence) pair
// pins the output exactly.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, bound), bound >= 1. Rejection sampling keeps the
  // draw sequence independent of the standard library's distribution details.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  int uniform_int(int lo, int hi) {  // inclusive range
    return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform_real() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform_real() < p; }

  // Derived stream for a sub-task (e.g. one sweep cell or one worker):
  // splitmix64 of (seed + index).
  Rng split(std::uint64_t index) const {
    std::uint64_t z = seed_ + index + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return Rng(z ^ (z >> 31));
  }

  // Fisher-Yates shuffle.
  template <typename Vec>
  void shuffle(Vec& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace cspkit
