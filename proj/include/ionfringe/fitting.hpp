#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ionfringe/interference.hpp"

namespace ionfringe {

// One measured interference scan. err is the standard error of rate.
struct MeasuredScan {
  struct Point {
    double u_tip;  // V
    double rate;   // counts/s
    double err;    // counts/s
  };
  std::vector<Point> points;
  int n_ions = 0;
  double integration_s = 0.0;   // optional metadata
  double background_cps = 0.0;  // stray light level contained in rate
};

enum class WeightMode { inverse_variance, uniform };

// Weighted linear least squares for rate ~ i_incoh + kappa * shape with both
// parameters constrained non-negative. An unconstrained optimum outside the
// quadrant is projected onto the best boundary solution.
struct LinearFit {
  double i_incoh = 0.0;
  double kappa = 0.0;
  double chi2 = 0.0;
  bool on_boundary = false;
  std::vector<double> residuals;  // rate - model, scan order
};

LinearFit fit_linear(const MeasuredScan& scan, const std::vector<double>& shape,
                     WeightMode weights = WeightMode::inverse_variance);

enum class FreeParam { theta, sigma_z, delta_u };

struct FitOptions {
  WeightMode weights = WeightMode::inverse_variance;
  int n_starts = 6;       // multi-start count on the coarse grid, minimum 5
  int max_iter = 6000;    // per Nelder-Mead run
  int bootstrap = 0;      // resample count for bootstrap errors, 0 = off
};

struct FitResult {
  FitParams params;
  // standard errors, NaN for parameters that were fixed or boundary pinned
  double err_i_incoh = 0.0;
  double err_kappa = 0.0;
  double err_theta = 0.0;
  double err_sigma_z = 0.0;
  double err_delta_u = 0.0;
  double chi2 = 0.0;
  int dof = 0;
  bool converged = false;
  bool on_boundary = false;
  std::vector<std::string> pinned;  // names of boundary-pinned parameters
  std::vector<double> residuals;
};

// Separable fit: for each trial of the free geometry parameters the chain is
// rebuilt on the shifted voltages and (i_incoh, kappa) are solved in closed
// form; the profiled chi2 is minimized by multi-start Nelder-Mead. Bounds:
// theta within +-2 deg of the configured value, sigma_z in (10 um, 10 mm),
// delta_u in (-0.5, +0.5) V. Ties in chi2 break toward the smallest |delta_u|
// and then the smallest sigma_z deviation from the configured value.
// Standard errors come from the local curvature of chi2 (central finite
// differences); bootstrap resampling is available through FitOptions.
// Throws ConvergenceError when no start converges.
FitResult fit_full(const MeasuredScan& scan, const PatternModel& model,
                   const std::vector<FreeParam>& free_params, std::uint64_t seed,
                   const FitOptions& opt = {});

// Visibility (max - min) / (max + min) of the fitted model i_incoh + kappa *
// shape evaluated on a dense grid over [u_lo, u_hi].
double visibility_from_fit(const PatternModel& model, const FitParams& p,
                           double u_lo, double u_hi);

}  // namespace ionfringe
