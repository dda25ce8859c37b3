#pragma once

#include <cstdint>
#include <vector>

#include "ionfringe/fitting.hpp"
#include "ionfringe/interference.hpp"

namespace ionfringe {

// Extremal visibility of a measured scan after subtracting the background
// recorded in the scan metadata from every rate. Negative post-subtraction
// rates are clamped to zero and flagged.
struct VisibilityEstimate {
  double v = 0.0;
  double i_max = 0.0;  // post-subtraction extremes, counts/s
  double i_min = 0.0;
  double background = 0.0;
  bool clamped = false;
};

VisibilityEstimate visibility_extremal(const MeasuredScan& scan);

// Background correction of a visibility obtained from extremes that still
// contain a flat level b: V' = V * s / (s - 2 b) where s = i_max + i_min.
double background_subtracted_visibility(double v_raw, double extremes_sum,
                                        double background);

// Which adjacent pair distance converts voltage widths to metric widths.
enum class PairConvention { innermost, mean };

// Full width at half maximum of the tallest peak of a sampled pattern,
// reported in scan voltage, in inter-ion distance change of the reference
// pair, and in relative phase of that pair. The distance conversion uses the
// analytic Jacobian d(pair distance)/dU at the peak voltage; the phase width
// is the distance width times (1 - cos theta) 2 pi / lambda.
struct FwhmResult {
  double u_peak = 0.0;    // V
  double width_v = 0.0;   // V
  double width_m = 0.0;   // m
  double width_rad = 0.0;
  double pair_distance = 0.0;  // m, reference pair distance at the peak
  bool left_truncated = false;
  bool right_truncated = false;
};

FwhmResult fwhm_of_max_peak(const std::vector<PatternPoint>& pattern,
                            const TrapConfig& trap, int n_ions,
                            const OpticsConfig& optics,
                            PairConvention pair = PairConvention::innermost);

// Maximum fully coherent intensity of the harmonic chain over the scanned
// voltage window, unit intensity per ion. Bounded by the incoherent level n
// and the equidistant-chain limit n^2.
struct ScalingPoint {
  int n_ions = 0;
  double max_intensity = 0.0;
  double u_peak = 0.0;  // V
};

std::vector<ScalingPoint> peak_intensity_scaling(const std::vector<int>& n_list,
                                                 const TrapConfig& trap,
                                                 const OpticsConfig& optics,
                                                 double u_lo, double u_hi);

// Jittered equidistant ensemble. Each realization freezes Gaussian position
// offsets (sigma_p, meters) on an equidistant baseline and sweeps the whole
// configuration through the same inner-pair phase range the harmonic chain
// covers between u_lo and u_hi, recording the maximum intensity. spacing = 0
// selects the harmonic innermost spacing at u_lo as the baseline.
struct MonteCarloConfig {
  double sigma_p = 0.0;    // m
  int realizations = 100;
  std::uint64_t seed = 1;
  double spacing = 0.0;    // m, equidistant baseline
};

struct JitterResult {
  double mean_max = 0.0;
  double sd_max = 0.0;
  std::vector<double> maxima;  // per realization, realization order
};

JitterResult jittered_equidistant_mc(const MonteCarloConfig& cfg, int n_ions,
                                     const TrapConfig& trap, const OpticsConfig& optics,
                                     double u_lo, double u_hi);

}  // namespace ionfringe
