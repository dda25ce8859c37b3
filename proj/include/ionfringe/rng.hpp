#pragma once

#include <cmath>
#include <cstdint>

namespace ionfringe {

// Counter-based generator (splitmix64 finalizer over seed + counter).
// Draw i depends only on (seed, stream, i), so parallel consumers get
// reproducible, scheduling-independent streams. No libc RNG involved,
// output is identical across platforms for the integer part; floating
// point draws go through sqrt/log/cos and match wherever IEEE libm does.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : base_(mix(seed + 0x9e3779b97f4a7c15ULL * (mix(stream) | 1))) {}

  std::uint64_t next_u64() {
    return mix(base_ + 0x9e3779b97f4a7c15ULL * ++counter_);
  }

  // uniform in [0, 1), 53 bit mantissa
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // standard normal via Box-Muller, two uniforms per draw, no state carried
  double normal() {
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.28318530717958647692 * u2);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

// Poisson draw. Inversion by sequential search for small means, normal
// approximation rounded to a non-negative integer above it. Deterministic
// given the generator state.
long long poisson(CounterRng& rng, double mean);

}  // namespace ionfringe
