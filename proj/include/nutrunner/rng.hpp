#pragma once

#include <cstdint>

namespace nutrunner {

// Counter-based 64-bit generator (splitmix64 applied to a keyed counter).
// Streams are derived by hashing a seed with stream labels, so every trial
// draws from an independent, reproducible sequence regardless of scheduling
// or thread count.
class CounterRng {
 public:
  explicit CounterRng(uint64_t key) : key_(key) {}

  // Independent substream: mixes the label into the key.
  CounterRng stream(uint64_t label) const { return CounterRng(mix(key_ ^ mix(label))); }

  uint64_t next_u64() { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

 private:
  static uint64_t mix(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  uint64_t key_;
  uint64_t counter_{0};
};

}  // namespace nutrunner
