#include "ionfringe/optics.hpp"

#include <cmath>

#include "ionfringe/errors.hpp"

namespace ionfringe {

double relative_phase(const OpticsConfig& cfg, double z) {
  return z * (1.0 - std::cos(cfg.theta)) * 2.0 * constants::pi / cfg.wavelength;
}

double fringe_period(const OpticsConfig& cfg) {
  const double proj = 1.0 - std::cos(cfg.theta);
  if (!(proj > 0.0))
    throw ValidationError("scattering angle gives no path difference");
  return cfg.wavelength / proj;
}

double beam_amplitude(const OpticsConfig& cfg, double z) {
  if (!std::isfinite(cfg.beam_sigma_z)) return 1.0;
  if (!(cfg.beam_sigma_z > 0.0))
    throw ValidationError("beam sigma must be positive");
  const double s2 = cfg.beam_sigma_z * cfg.beam_sigma_z;
  const double e = cfg.gaussian_convention == GaussianConvention::paper
                       ? z * z / s2
                       : z * z / (2.0 * s2);
  return std::exp(-e) / (std::sqrt(2.0 * constants::pi) * cfg.beam_sigma_z);
}

double detection_coupling(const OpticsConfig& cfg, double z) {
  const double r = z / cfg.rayleigh_range;
  return 1.0 / (1.0 + r * r);
}

}  // namespace ionfringe
