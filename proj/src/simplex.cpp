#include "ionfringe/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ionfringe/errors.hpp"

namespace ionfringe {

namespace {

void clamp_into(std::vector<double>& x, const std::vector<double>& lo,
                const std::vector<double>& hi) {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
}

}  // namespace

SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          const std::vector<double>& x0,
                          const std::vector<double>& step,
                          const std::vector<double>& lo,
                          const std::vector<double>& hi,
                          const SimplexOptions& opt) {
  const std::size_t n = x0.size();
  if (step.size() != n || lo.size() != n || hi.size() != n)
    throw ValidationError("simplex dimensions disagree");
  for (std::size_t i = 0; i < n; ++i)
    if (!(lo[i] <= hi[i])) throw ValidationError("simplex box is inverted");

  std::vector<std::vector<double>> verts(n + 1, x0);
  clamp_into(verts[0], lo, hi);
  for (std::size_t i = 0; i < n; ++i) {
    auto& v = verts[i + 1];
    v[i] += step[i];
    if (v[i] > hi[i] || v[i] < lo[i]) v[i] = x0[i] - step[i];
    clamp_into(v, lo, hi);
    if (v[i] == verts[0][i])  // box thinner than the step
      v[i] = 0.5 * (lo[i] + hi[i]);
  }
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fv[i] = f(verts[i]);

  SimplexResult result;
  std::vector<std::size_t> order(n + 1);
  int it = 0;
  for (; it < opt.max_iter; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&fv](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });

    const double spread = fv[order[n]] - fv[order[0]];
    double edge = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      edge = std::max(edge, std::fabs(verts[order[n]][i] - verts[order[0]][i]) /
                                std::max(1.0, std::fabs(verts[order[0]][i])));
    if (spread < opt.ftol || edge < opt.xtol) {
      result.converged = true;
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t i = 0; i < n; ++i) centroid[i] += verts[order[r]][i] / n;

    const std::size_t worst = order[n];
    auto probe = [&](double coeff) {
      std::vector<double> x(n);
      for (std::size_t i = 0; i < n; ++i)
        x[i] = centroid[i] + coeff * (verts[worst][i] - centroid[i]);
      clamp_into(x, lo, hi);
      return x;
    };

    const auto reflected = probe(-1.0);
    const double fr = f(reflected);
    if (fr < fv[order[0]]) {
      const auto expanded = probe(-2.0);
      const double fe = f(expanded);
      if (fe < fr) {
        verts[worst] = expanded;
        fv[worst] = fe;
      } else {
        verts[worst] = reflected;
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[order[n - 1]]) {
      verts[worst] = reflected;
      fv[worst] = fr;
      continue;
    }
    const auto contracted = probe(fr < fv[worst] ? -0.5 : 0.5);
    const double fc = f(contracted);
    if (fc < std::min(fr, fv[worst])) {
      verts[worst] = contracted;
      fv[worst] = fc;
      continue;
    }
    // shrink toward the best vertex
    for (std::size_t r = 0; r <= n; ++r) {
      if (order[r] == order[0]) continue;
      auto& v = verts[order[r]];
      for (std::size_t i = 0; i < n; ++i)
        v[i] = verts[order[0]][i] + 0.5 * (v[i] - verts[order[0]][i]);
      clamp_into(v, lo, hi);
      fv[order[r]] = f(v);
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i <= n; ++i)
    if (fv[i] < fv[best]) best = i;
  result.x = verts[best];
  result.fmin = fv[best];
  result.iterations = it;
  return result;
}

}  // namespace ionfringe
