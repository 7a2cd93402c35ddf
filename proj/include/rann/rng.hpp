#pragma once

#include <cmath>
#include <cstdint>

namespace rann {

/// Deterministic splitmix64 generator. A (seed, stream) pair selects an
/// independent stream, so substructures sampled in parallel stay
/// reproducible: stream i always sees the same draws no matter which thread
/// builds it.
class Rng {
 public:
  explicit Rng(uint64_t seed, uint64_t stream = 0)
      : state_(mix(mix(seed + 0x5851f42d4c957f2dULL) ^
                   mix(stream + 0x14057b7ef767814fULL))) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  /// Uniform in [0, 1).
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in (0, 1); safe as a log() argument.
  double next_open() {
    return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). Modulo bias is immaterial at the sizes used
  /// here (n far below 2^32).
  uint64_t next_below(uint64_t n) { return next_u64() % n; }

  bool bernoulli(double prob) { return next_double() < prob; }

  /// Exact Binomial(trials, prob) sample via geometric gap skipping;
  /// O(1 + trials * prob) expected draws instead of one per trial.
  int binomial(int trials, double prob) {
    if (trials <= 0 || prob <= 0.0) return 0;
    if (prob >= 1.0) return trials;
    const double log_q = std::log1p(-prob);
    int count = 0;
    long long pos = 0;
    while (true) {
      pos += static_cast<long long>(std::floor(std::log(next_open()) / log_q)) + 1;
      if (pos > trials) break;
      ++count;
    }
    return count;
  }

 private:
  static uint64_t mix(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  uint64_t state_;
};

}  // namespace rann
