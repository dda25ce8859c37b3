#include "ionfringe/peak_search.hpp"

#include <algorithm>
#include <cmath>

#include "ionfringe/errors.hpp"

namespace ionfringe {

GridMax max_on_grid(const std::function<double(double)>& f, double lo, double hi,
                    int n_points, double refine_tol) {
  if (!(lo < hi)) throw ValidationError("grid interval is empty");
  if (n_points < 3) throw ValidationError("grid needs at least three points");

  int best = 0;
  double best_val = -1e300, best_x = lo;
  for (int i = 0; i < n_points; ++i) {
    const double x = lo + (hi - lo) * i / (n_points - 1);
    const double v = f(x);
    if (v > best_val) {
      best_val = v;
      best_x = x;
      best = i;
    }
  }
  GridMax out{best_x, best_val, best == 0 || best == n_points - 1};
  if (out.at_edge) return out;

  // Golden-section refinement inside the bracketing pair of grid cells.
  const double h = (hi - lo) / (n_points - 1);
  double a = best_x - h, b = best_x + h;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > refine_tol) {
    if (f1 > f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(x2);
    }
    if (f1 > out.value) {
      out.value = f1;
      out.x = x1;
    }
    if (f2 > out.value) {
      out.value = f2;
      out.x = x2;
    }
  }
  return out;
}

HalfMaxWidth fwhm_on_grid(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw ValidationError("grid arrays differ in length");
  if (xs.size() < 3) throw ValidationError("width needs at least three samples");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1])) throw ValidationError("grid must be strictly increasing");

  std::size_t m = 0;
  double y_min = ys[0];
  for (std::size_t i = 0; i < ys.size(); ++i) {
    if (ys[i] > ys[m]) m = i;
    y_min = std::min(y_min, ys[i]);
  }

  if (!(ys[m] - y_min > 1e-300 * std::max(1.0, std::fabs(ys[m]))))
    throw ValidationError("pattern has no peak above its floor");

  HalfMaxWidth out;
  out.x_peak = xs[m];
  out.peak = ys[m];
  out.half_level = 0.5 * (ys[m] + y_min);

  // Left crossing: first sample below the half level walking away from the
  // peak, crossing interpolated linearly inside that step.
  std::size_t i = m;
  while (i > 0 && ys[i - 1] > out.half_level) --i;
  if (i == 0) {
    out.left_truncated = true;
    out.x_left = xs.front();
  } else {
    const double t = (out.half_level - ys[i - 1]) / (ys[i] - ys[i - 1]);
    out.x_left = xs[i - 1] + t * (xs[i] - xs[i - 1]);
  }
  const std::size_t left_edge = i;

  std::size_t j = m;
  while (j + 1 < ys.size() && ys[j + 1] > out.half_level) ++j;
  if (j + 1 == ys.size()) {
    out.right_truncated = true;
    out.x_right = xs.back();
  } else {
    const double t = (ys[j] - out.half_level) / (ys[j] - ys[j + 1]);
    out.x_right = xs[j] + t * (xs[j + 1] - xs[j]);
  }

  out.width = out.x_right - out.x_left;
  out.samples_above = static_cast<int>(j - left_edge + 1);
  return out;
}

}  // namespace ionfringe
