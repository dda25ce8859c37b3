#pragma once

#include <functional>
#include <vector>

namespace ionfringe {

// Maximum of f over [lo, hi]: dense grid scan followed by golden-section
// refinement of the bracketing triple. refine_tol is the final bracket width
// in x; keep it large enough that smooth peaks retain a representable
// deficit from their analytic value, a few orders above machine epsilon.
struct GridMax {
  double x = 0.0;
  double value = 0.0;
  bool at_edge = false;  // maximum sits on an interval end, no bracket
};

GridMax max_on_grid(const std::function<double(double)>& f, double lo, double hi,
                    int n_points, double refine_tol);

// Full width of the tallest peak of sampled data at the half level
// (max + min) / 2, crossings located by linear interpolation between
// samples. xs must be strictly increasing.
struct HalfMaxWidth {
  double x_peak = 0.0;
  double peak = 0.0;
  double half_level = 0.0;
  double x_left = 0.0;
  double x_right = 0.0;
  double width = 0.0;
  bool left_truncated = false;   // crossing ran into the scan edge
  bool right_truncated = false;
  int samples_above = 0;         // samples above the half level in the peak
};

HalfMaxWidth fwhm_on_grid(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace ionfringe
