#pragma once

#include <cstdint>

namespace handover {

/// SplitMix64 generator with counter-keyed substreams.
///
/// A substream is fully determined by (seed, index), so per-cycle draws in
/// the simulator do not depend on thread count or scheduling, and the same
/// seed reproduces the same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t state) : state_(state) {}

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  static Rng substream(std::uint64_t seed, std::uint64_t index) {
    return Rng(mix(seed + 0x9E3779B97F4A7C15ull) ^ mix(index ^ 0xD1B54A32D192ED03ull));
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix(state_);
  }

  /// Uniform in [0, 1), 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

}  // namespace handover
