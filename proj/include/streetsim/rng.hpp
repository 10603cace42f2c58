#pragma once

#include <cstdint>

namespace streetsim {

/// Counter-free splitmix64 generator. Kept deliberately tiny so that seeded
/// runs replay bit-identically on every platform; standard-library
/// distributions are not pinned across implementations, so all draws go
/// through the explicit mappings below.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  uint64_t uniform_index(uint64_t n) { return next_u64() % n; }

  uint64_t state() const { return state_; }

  /// Derives an independent stream (e.g. environment vs. traffic draws).
  static uint64_t derive_seed(uint64_t seed, uint64_t stream) {
    Rng r(seed ^ (0xA0761D6478BD642Full * (stream + 1)));
    return r.next_u64();
  }

 private:
  uint64_t state_;
};

}  // namespace streetsim
