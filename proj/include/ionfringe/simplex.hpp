#pragma once

#include <functional>
#include <vector>

namespace ionfringe {

// Nelder-Mead downhill simplex with box constraints (trial points are
// clamped into the box). Deterministic for a given start.
struct SimplexOptions {
  int max_iter = 4000;
  double ftol = 1e-15;   // absolute spread of simplex values
  double xtol = 1e-11;   // simplex edge length relative to parameter scale
};

struct SimplexResult {
  std::vector<double> x;
  double fmin = 0.0;
  int iterations = 0;
  bool converged = false;
};

SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          const std::vector<double>& x0,
                          const std::vector<double>& step,
                          const std::vector<double>& lo,
                          const std::vector<double>& hi,
                          const SimplexOptions& opt = {});

}  // namespace ionfringe
