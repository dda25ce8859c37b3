#pragma once

#include <limits>

#include "ionfringe/constants.hpp"

namespace ionfringe {

// Exponent convention for the illumination envelope. "paper" keeps the
// printed form exp(-z^2/sigma^2); "standard" uses exp(-z^2/(2 sigma^2)).
enum class GaussianConvention { paper, standard };

struct OpticsConfig {
  double wavelength = 397e-9;  // m
  // angle between excitation beam and axial observation direction, rad
  double theta = 45.19 * constants::pi / 180.0;
  // 1σ extent of the illuminating beam along the chain; infinity = uniform
  double beam_sigma_z = std::numeric_limits<double>::infinity();  // m
  double mode_waist = 17e-6;       // m, collection mode waist
  double rayleigh_range = 2.3e-3;  // m
  GaussianConvention gaussian_convention = GaussianConvention::paper;
  bool detection_envelope = false;  // apply coupling roll-off in patterns
};

// Path difference phase of light emitted at axial position z, relative to
// the chain center, for scattering angle theta between the excitation beam
// and the axial observation direction:
//   dphi = z * (1 - cos theta) * 2 pi / lambda.
double relative_phase(const OpticsConfig& cfg, double z);

// Fringe period in inter-ion distance, lambda / (1 - cos theta), m.
double fringe_period(const OpticsConfig& cfg);

// Relative field amplitude of the illumination at z. For finite beam_sigma_z
//   A(z) = (1 / (sqrt(2 pi) sigma_z)) * exp(-z^2 / sigma_z^2)
// under the "paper" convention (see GaussianConvention for the alternative
// exponent); the prefactor is shared by both conventions and is absorbed by
// the fitted amplitude scale downstream. Infinite beam_sigma_z returns 1
// (uniform).
double beam_amplitude(const OpticsConfig& cfg, double z);

// Detection mode coupling 1 / (1 + (z / z_R)^2). Always evaluates the
// envelope; OpticsConfig::detection_envelope decides whether pattern
// evaluation applies it (default off, the measured dependence is flat).
double detection_coupling(const OpticsConfig& cfg, double z);

}  // namespace ionfringe
