#pragma once

// Seeded draws with fully specified algorithms. The standard distributions
// are implementation-defined, which would make generated stimulus sets depend
// on the standard library; these helpers only rely on mt19937_64's output.

#include <cmath>
#include <cstdint>
#include <random>

namespace hpa {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream) : engine_(splitmix64(seed ^ splitmix64(stream))) {}

  // Uniform in (0, 1].
  double unit() { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }

  // Uniform integer in [lo, hi].
  std::uint64_t between(std::uint64_t lo, std::uint64_t hi) {
    const std::uint64_t span = hi - lo + 1;
    if (span == 0) return engine_();  // full 64-bit range
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return lo + x % span;
  }

  // Geometric on {1, 2, ...} with the given mean (>= 1).
  std::uint64_t geometric(double mean) {
    if (mean <= 1.0) return 1;
    const double q = 1.0 / mean;
    return 1 + static_cast<std::uint64_t>(std::floor(std::log(unit()) / std::log1p(-q)));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace hpa
