#pragma once

#include <cstdint>
#include <string>

#include "ionfringe/analysis.hpp"
#include "ionfringe/interference.hpp"
#include "ionfringe/optics.hpp"
#include "ionfringe/trap.hpp"

namespace ionfringe {

// Defaults shared by analysis subcommands.
struct AnalysisConfig {
  double scan_u_lo = 5.0;    // V, scaling and Monte Carlo window
  double scan_u_hi = 900.0;  // V
  double fwhm_u_lo = 5.0;    // V, peak-width window
  double fwhm_u_hi = 900.0;  // V
  double background_cps = 9.3;  // default stray light level
  std::uint64_t seed = 1;
  int mc_realizations = 100;
  PairConvention fwhm_pair = PairConvention::innermost;
  int grid_per_fringe = 50;  // samples across the narrowest expected fringe
};

struct RunConfig {
  TrapConfig trap;
  OpticsConfig optics;
  DephasingConfig dephasing;
  AnalysisConfig analysis;
};

// Defaults equal the shipped configuration file.
RunConfig default_config();

// Strict parse of an INI-style config with [trap], [optics], [dephasing] and
// [analysis] sections. Unknown sections or keys, malformed values and
// out-of-range settings raise ValidationError with the line number. An empty
// file yields default_config(). Keys carry their units as suffixes.
RunConfig load_config(const std::string& path);

}  // namespace ionfringe
