#include "ionfringe/rng.hpp"

#include <cmath>

#include "ionfringe/errors.hpp"

namespace ionfringe {

long long poisson(CounterRng& rng, double mean) {
  if (!(mean >= 0.0)) throw ValidationError("poisson mean must be non-negative");
  if (mean == 0.0) return 0;
  if (mean < 30.0) {
    // Knuth inversion: product of uniforms against exp(-mean).
    const double limit = std::exp(-mean);
    long long k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= rng.uniform();
    } while (p > limit);
    return k - 1;
  }
  const double g = std::round(mean + std::sqrt(mean) * rng.normal());
  return g < 0.0 ? 0 : static_cast<long long>(g);
}

}  // namespace ionfringe
