#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace tablecount {

/// SplitMix64 output function (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Sub-seed for stream `index` of a master seed. Every randomized routine that
/// can run in parallel keys its per-item stream on this, so results do not
/// depend on scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index));
}

/// Seedable 64-bit generator. The engine is std::mt19937_64, whose output
/// sequence is fixed by the standard; the conversions to uniform and
/// exponential variates are done here rather than through <random>
/// distributions, whose algorithms are implementation-defined.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard exponential by inverse CDF, -ln(1 - U).
  double exponential() { return -std::log1p(-uniform01()); }

  /// Uniform integer in [0, bound), unbiased by rejection. bound > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % bound;
  }

private:
  std::mt19937_64 engine_;
};

}  // namespace tablecount
