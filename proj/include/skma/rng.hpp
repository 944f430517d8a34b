#pragma once

#include <cstdint>

namespace skma {

// SplitMix64 generator. Chosen over std::mt19937 + <random> distributions
// because the standard distributions are not reproducible across standard
// library implementations, while every draw here is fully specified:
//   - next_u64: Vigna's splitmix64 step
//   - next_double: top 53 bits scaled to [0, 1)
//   - normal/uniform: inverse-CDF transforms of next_double
//
// Streams: stream(seed, k) yields an independent generator for sub-task k
// (curve index, benchmark run, ...). Consumers document their draw order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  static Rng stream(std::uint64_t seed, std::uint64_t index) {
    // Decorrelate the stream index before mixing it into the seed.
    Rng h(index + 0x9e3779b97f4a7c15ULL);
    return Rng(seed ^ h.next_u64());
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // k uniform in {0, ..., n-1}; n must be > 0. Modulo bias is negligible
  // for the small n used here (cluster counts), and determinism matters more.
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  double normal(double mean, double sd) {
    return mean + sd * inverse_normal_cdf(next_double());
  }

  // Wichura's AS 241 (PPND16): double-precision inverse of the standard
  // normal CDF. p in (0, 1); endpoints are clamped one ulp inward.
  static double inverse_normal_cdf(double p);

 private:
  std::uint64_t state_;
};

}  // namespace skma
