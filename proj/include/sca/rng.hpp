#pragma once

#include <cstdint>

namespace sca {

// SplitMix64 finalizer. Bit-exact across implementations by contract.
inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

/// Counter-based symbol draw: uniform over [0, r) from (seed, step, cell).
/// Rejection resamples successive counters mix64(x), mix64(x+1), ... where
/// x = seed ^ mix64(t * golden_gamma ^ z); a draw is accepted when it falls
/// below floor(2^64/r)*r. Stateless, hence reproducible under any execution
/// order or degree of parallelism.
inline std::uint32_t counter_symbol(std::uint64_t seed, std::uint64_t t, std::int64_t z,
                                    std::uint64_t r) {
  const std::uint64_t gamma = 0x9E3779B97F4A7C15ULL;
  const std::uint64_t x = seed ^ mix64(t * gamma ^ static_cast<std::uint64_t>(z));
  // floor(2^64/r)*r in 128 bits; equals 2^64 (never rejects) when r | 2^64.
  const unsigned __int128 full = (static_cast<unsigned __int128>(1) << 64);
  const unsigned __int128 threshold = (full / r) * r;
  for (std::uint64_t i = 0;; ++i) {
    const std::uint64_t v = mix64(x + i);
    if (static_cast<unsigned __int128>(v) < threshold) return static_cast<std::uint32_t>(v % r);
  }
}

/// Small seedable generator for test-side instance sampling (not part of the
/// reproducibility contract; tests freeze their seeds).
class SplitMix {
 public:
  explicit SplitMix(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }
  std::uint64_t below(std::uint64_t n) { return n ? next() % n : 0; }

 private:
  std::uint64_t state_;
};

}  // namespace sca
