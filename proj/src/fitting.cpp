#include "ionfringe/fitting.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "ionfringe/errors.hpp"
#include "ionfringe/rng.hpp"
#include "ionfringe/simplex.hpp"

namespace ionfringe {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::vector<double> scan_weights(const MeasuredScan& scan, WeightMode mode) {
  std::vector<double> w(scan.points.size(), 1.0);
  if (mode == WeightMode::inverse_variance) {
    for (std::size_t i = 0; i < scan.points.size(); ++i) {
      const double e = scan.points[i].err;
      if (!(e > 0.0))
        throw ValidationError("inverse variance weights need positive errors");
      w[i] = 1.0 / (e * e);
    }
  }
  return w;
}

double chi2_at(const MeasuredScan& scan, const std::vector<double>& w,
               const std::vector<double>& shape, double b, double k) {
  double c = 0.0;
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    const double r = scan.points[i].rate - b - k * shape[i];
    c += w[i] * r * r;
  }
  return c;
}

}  // namespace

LinearFit fit_linear(const MeasuredScan& scan, const std::vector<double>& shape,
                     WeightMode weights) {
  if (scan.points.size() != shape.size())
    throw ValidationError("scan and shape lengths differ");
  if (scan.points.size() < 3)
    throw ValidationError("linear fit needs at least three points");
  const std::vector<double> w = scan_weights(scan, weights);

  double sw = 0.0, ss = 0.0, sss = 0.0, sr = 0.0, srs = 0.0;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    sw += w[i];
    ss += w[i] * shape[i];
    sss += w[i] * shape[i] * shape[i];
    sr += w[i] * scan.points[i].rate;
    srs += w[i] * scan.points[i].rate * shape[i];
  }
  const double det = sw * sss - ss * ss;
  if (!(det > 1e-12 * std::max(sw * sss, ss * ss)))
    throw ValidationError("shape carries no variation to fit");

  LinearFit fit;
  fit.i_incoh = (sss * sr - ss * srs) / det;
  fit.kappa = (sw * srs - ss * sr) / det;
  if (fit.i_incoh < 0.0 || fit.kappa < 0.0) {
    // Projected candidates on the non-negativity boundary.
    struct Cand {
      double b, k;
    };
    const Cand cands[] = {{0.0, std::max(0.0, srs / sss)},
                          {std::max(0.0, sr / sw), 0.0},
                          {0.0, 0.0}};
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : cands) {
      const double chi = chi2_at(scan, w, shape, c.b, c.k);
      if (chi < best) {
        best = chi;
        fit.i_incoh = c.b;
        fit.kappa = c.k;
      }
    }
    fit.on_boundary = true;
  }
  fit.chi2 = chi2_at(scan, w, shape, fit.i_incoh, fit.kappa);
  fit.residuals.resize(shape.size());
  for (std::size_t i = 0; i < shape.size(); ++i)
    fit.residuals[i] = scan.points[i].rate - fit.i_incoh - fit.kappa * shape[i];
  return fit;
}

namespace {

// Internal coordinates for the geometry parameters: theta and delta_u are
// linear, sigma_z is searched in log space because its bounds span three
// decades.
struct GeometryBox {
  std::vector<FreeParam> which;
  std::vector<double> lo, hi, ref;
};

GeometryBox make_box(const std::vector<FreeParam>& free_params,
                     const OpticsConfig& optics) {
  GeometryBox box;
  for (std::size_t i = 0; i < free_params.size(); ++i)
    for (std::size_t j = i + 1; j < free_params.size(); ++j)
      if (free_params[i] == free_params[j])
        throw ValidationError("duplicate free parameter");
  const double deg = constants::pi / 180.0;
  for (FreeParam fp : free_params) {
    box.which.push_back(fp);
    switch (fp) {
      case FreeParam::theta:
        box.lo.push_back(optics.theta - 2.0 * deg);
        box.hi.push_back(optics.theta + 2.0 * deg);
        box.ref.push_back(optics.theta);
        break;
      case FreeParam::sigma_z: {
        box.lo.push_back(std::log(10e-6));
        box.hi.push_back(std::log(10e-3));
        const double base = std::isfinite(optics.beam_sigma_z)
                                ? std::clamp(optics.beam_sigma_z, 10e-6, 10e-3)
                                : std::sqrt(10e-6 * 10e-3);
        box.ref.push_back(std::log(base));
        break;
      }
      case FreeParam::delta_u:
        box.lo.push_back(-0.5);
        box.hi.push_back(0.5);
        box.ref.push_back(0.0);
        break;
    }
  }
  return box;
}

FitParams params_from(const GeometryBox& box, const std::vector<double>& x,
                      const OpticsConfig& optics) {
  FitParams p = FitParams::neutral(optics);
  for (std::size_t i = 0; i < box.which.size(); ++i) {
    switch (box.which[i]) {
      case FreeParam::theta:
        p.theta = x[i];
        break;
      case FreeParam::sigma_z:
        p.sigma_z = std::exp(x[i]);
        break;
      case FreeParam::delta_u:
        p.delta_u = x[i];
        break;
    }
  }
  return p;
}

struct ProfiledFit {
  double chi2 = std::numeric_limits<double>::infinity();
  LinearFit linear;
  bool valid = false;
};

ProfiledFit profile_linear(const MeasuredScan& scan, const PatternModel& model,
                           const GeometryBox& box, const std::vector<double>& x,
                           WeightMode weights) {
  ProfiledFit out;
  try {
    const FitParams p = params_from(box, x, model.optics());
    std::vector<double> shape(scan.points.size());
    for (std::size_t i = 0; i < scan.points.size(); ++i)
      shape[i] = model.shape(scan.points[i].u_tip, p);
    out.linear = fit_linear(scan, shape, weights);
    out.chi2 = out.linear.chi2;
    out.valid = true;
  } catch (const ValidationError&) {
    // voltage shift outside the calibrated range, degenerate shape, ...
  } catch (const ConvergenceError&) {
  }
  return out;
}

// chi2 ties break toward the smallest voltage shift, then the smallest beam
// size deviation from the reference, so repeated fits pick one minimizer.
bool better_candidate(double chi_a, const std::vector<double>& xa, double chi_b,
                      const std::vector<double>& xb, const GeometryBox& box) {
  const double tol = 1e-9 * (1.0 + std::min(chi_a, chi_b));
  if (chi_a < chi_b - tol) return true;
  if (chi_b < chi_a - tol) return false;
  for (std::size_t i = 0; i < box.which.size(); ++i) {
    if (box.which[i] != FreeParam::delta_u) continue;
    if (std::fabs(xa[i]) < std::fabs(xb[i]) - 1e-15) return true;
    if (std::fabs(xb[i]) < std::fabs(xa[i]) - 1e-15) return false;
  }
  for (std::size_t i = 0; i < box.which.size(); ++i) {
    if (box.which[i] != FreeParam::sigma_z) continue;
    const double da = std::fabs(xa[i] - box.ref[i]), db = std::fabs(xb[i] - box.ref[i]);
    if (da < db - 1e-15) return true;
    if (db < da - 1e-15) return false;
  }
  return chi_a < chi_b;
}

}  // namespace

FitResult fit_full(const MeasuredScan& scan, const PatternModel& model,
                   const std::vector<FreeParam>& free_params, std::uint64_t seed,
                   const FitOptions& opt) {
  if (static_cast<int>(scan.points.size()) <
      3 + static_cast<int>(free_params.size()))
    throw ValidationError("not enough points for the requested fit");
  const GeometryBox box = make_box(free_params, model.optics());
  const std::size_t nfree = box.which.size();

  std::vector<double> best_x = box.ref;
  double best_chi = std::numeric_limits<double>::infinity();
  bool any_converged = false;

  if (nfree == 0) {
    const ProfiledFit f0 = profile_linear(scan, model, box, {}, opt.weights);
    if (!f0.valid) throw ConvergenceError("model could not be evaluated");
    best_chi = f0.chi2;
    any_converged = true;
  } else {
    const int n_starts = std::max(5, opt.n_starts);
    CounterRng rng(seed, 0xf17);
    SimplexOptions sopt;
    sopt.max_iter = opt.max_iter;
    for (int s = 0; s < n_starts; ++s) {
      std::vector<double> x0(nfree), step(nfree);
      for (std::size_t i = 0; i < nfree; ++i) {
        x0[i] = s == 0 ? box.ref[i]
                       : box.lo[i] + (box.hi[i] - box.lo[i]) * rng.uniform();
        step[i] = 0.2 * (box.hi[i] - box.lo[i]);
      }
      auto objective = [&](const std::vector<double>& x) {
        const ProfiledFit f = profile_linear(scan, model, box, x, opt.weights);
        return f.valid ? f.chi2 : 1e300;
      };
      const SimplexResult run =
          nelder_mead(objective, x0, step, box.lo, box.hi, sopt);
      if (!run.converged) continue;
      any_converged = true;
      if (better_candidate(run.fmin, run.x, best_chi, best_x, box)) {
        best_chi = run.fmin;
        best_x = run.x;
      }
    }
    if (!any_converged)
      throw ConvergenceError("no optimizer start converged");
  }

  const ProfiledFit final_fit =
      profile_linear(scan, model, box, best_x, opt.weights);
  if (!final_fit.valid) throw ConvergenceError("fit landed on an invalid point");

  FitResult result;
  result.params = params_from(box, best_x, model.optics());
  result.params.i_incoh = final_fit.linear.i_incoh;
  result.params.kappa = final_fit.linear.kappa;
  result.chi2 = final_fit.chi2;
  result.dof = static_cast<int>(scan.points.size()) - 2 - static_cast<int>(nfree);
  result.converged = any_converged;
  result.on_boundary = final_fit.linear.on_boundary;
  result.residuals = final_fit.linear.residuals;
  result.err_theta = result.err_sigma_z = result.err_delta_u = kNan;

  if (final_fit.linear.on_boundary) {
    if (final_fit.linear.i_incoh == 0.0) result.pinned.push_back("i_incoh");
    if (final_fit.linear.kappa == 0.0) result.pinned.push_back("kappa");
  }
  for (std::size_t i = 0; i < nfree; ++i) {
    const double span = box.hi[i] - box.lo[i];
    if (best_x[i] - box.lo[i] < 1e-9 * span || box.hi[i] - best_x[i] < 1e-9 * span) {
      result.on_boundary = true;
      switch (box.which[i]) {
        case FreeParam::theta:
          result.pinned.push_back("theta");
          break;
        case FreeParam::sigma_z:
          result.pinned.push_back("sigma_z");
          break;
        case FreeParam::delta_u:
          result.pinned.push_back("delta_u");
          break;
      }
    }
  }
  auto is_pinned = [&](const char* name) {
    return std::find(result.pinned.begin(), result.pinned.end(), name) !=
           result.pinned.end();
  };

  // Joint curvature of chi2 over every parameter that is free and away from
  // a boundary; covariance = 2 H^-1 for chi2 = -2 log L.
  struct Axis {
    const char* name;
    double value;
    double h;  // central difference step
  };
  std::vector<Axis> axes;
  if (!is_pinned("i_incoh"))
    axes.push_back({"i_incoh", final_fit.linear.i_incoh,
                    1e-5 * (1.0 + std::fabs(final_fit.linear.i_incoh))});
  if (!is_pinned("kappa"))
    axes.push_back({"kappa", final_fit.linear.kappa,
                    1e-5 * (1.0 + std::fabs(final_fit.linear.kappa))});
  std::vector<int> geom_axis(nfree, -1);
  for (std::size_t i = 0; i < nfree; ++i) {
    const char* name = box.which[i] == FreeParam::theta     ? "theta"
                       : box.which[i] == FreeParam::sigma_z ? "sigma_z"
                                                            : "delta_u";
    if (is_pinned(name)) continue;
    geom_axis[i] = static_cast<int>(axes.size());
    axes.push_back({name, best_x[i], 1e-5 * (box.hi[i] - box.lo[i])});
  }

  const std::vector<double> w = scan_weights(scan, opt.weights);
  auto chi2_full = [&](const std::vector<double>& v) {
    std::vector<double> x = best_x;
    double b = final_fit.linear.i_incoh, k = final_fit.linear.kappa;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      if (std::string(axes[a].name) == "i_incoh") b = v[a];
      else if (std::string(axes[a].name) == "kappa") k = v[a];
    }
    for (std::size_t i = 0; i < nfree; ++i)
      if (geom_axis[i] >= 0) x[i] = v[geom_axis[i]];
    const FitParams p = params_from(box, x, model.optics());
    double c = 0.0;
    for (std::size_t i = 0; i < scan.points.size(); ++i) {
      const double r =
          scan.points[i].rate - b - k * model.shape(scan.points[i].u_tip, p);
      c += w[i] * r * r;
    }
    return c;
  };

  const std::size_t na = axes.size();
  if (na > 0) {
    std::vector<double> center(na);
    for (std::size_t a = 0; a < na; ++a) center[a] = axes[a].value;
    Eigen::MatrixXd hess(na, na);
    const double c0 = chi2_full(center);
    bool fd_ok = true;
    for (std::size_t a = 0; a < na && fd_ok; ++a) {
      for (std::size_t b = a; b < na && fd_ok; ++b) {
        double second;
        if (a == b) {
          auto vp = center, vm = center;
          vp[a] += axes[a].h;
          vm[a] -= axes[a].h;
          second = (chi2_full(vp) - 2.0 * c0 + chi2_full(vm)) / (axes[a].h * axes[a].h);
        } else {
          auto vpp = center, vpm = center, vmp = center, vmm = center;
          vpp[a] += axes[a].h;
          vpp[b] += axes[b].h;
          vpm[a] += axes[a].h;
          vpm[b] -= axes[b].h;
          vmp[a] -= axes[a].h;
          vmp[b] += axes[b].h;
          vmm[a] -= axes[a].h;
          vmm[b] -= axes[b].h;
          second = (chi2_full(vpp) - chi2_full(vpm) - chi2_full(vmp) + chi2_full(vmm)) /
                   (4.0 * axes[a].h * axes[b].h);
        }
        if (!std::isfinite(second)) fd_ok = false;
        hess(a, b) = hess(b, a) = second;
      }
    }
    if (fd_ok) {
      const Eigen::MatrixXd cov = 2.0 * hess.inverse();
      for (std::size_t a = 0; a < na; ++a) {
        const double var = cov(a, a);
        const double err = var > 0.0 ? std::sqrt(var) : kNan;
        const std::string name = axes[a].name;
        if (name == "i_incoh") result.err_i_incoh = err;
        else if (name == "kappa") result.err_kappa = err;
        else if (name == "theta") result.err_theta = err;
        else if (name == "delta_u") result.err_delta_u = err;
        else if (name == "sigma_z")  // log axis: d sigma = sigma * d log
          result.err_sigma_z = err * result.params.sigma_z;
      }
    }
  }
  if (is_pinned("i_incoh")) result.err_i_incoh = kNan;
  if (is_pinned("kappa")) result.err_kappa = kNan;

  if (opt.bootstrap > 0 && nfree > 0) {
    // Parametric resampling from the fitted model and the reported errors;
    // each replicate restarts the simplex from the fitted point.
    std::vector<std::vector<double>> samples;
    const FitParams p_fit = result.params;
    for (int rep = 0; rep < opt.bootstrap; ++rep) {
      CounterRng rep_rng(seed, 0xb00 + static_cast<std::uint64_t>(rep));
      MeasuredScan fake = scan;
      for (auto& pt : fake.points) {
        const double mu = p_fit.i_incoh + p_fit.kappa *
                          model.shape(pt.u_tip, p_fit);
        pt.rate = mu + pt.err * rep_rng.normal();
      }
      auto objective = [&](const std::vector<double>& x) {
        const ProfiledFit f = profile_linear(fake, model, box, x, opt.weights);
        return f.valid ? f.chi2 : 1e300;
      };
      std::vector<double> step(nfree);
      for (std::size_t i = 0; i < nfree; ++i)
        step[i] = 0.05 * (box.hi[i] - box.lo[i]);
      SimplexOptions sopt;
      sopt.max_iter = opt.max_iter;
      const SimplexResult run =
          nelder_mead(objective, best_x, step, box.lo, box.hi, sopt);
      if (!run.converged) continue;
      const ProfiledFit f = profile_linear(fake, model, box, run.x, opt.weights);
      if (!f.valid) continue;
      std::vector<double> row{f.linear.i_incoh, f.linear.kappa};
      for (std::size_t i = 0; i < nfree; ++i)
        row.push_back(box.which[i] == FreeParam::sigma_z ? std::exp(run.x[i])
                                                         : run.x[i]);
      samples.push_back(row);
    }
    if (samples.size() >= 8) {
      const std::size_t cols = samples[0].size();
      std::vector<double> sd(cols, 0.0), mean(cols, 0.0);
      for (const auto& row : samples)
        for (std::size_t c = 0; c < cols; ++c) mean[c] += row[c];
      for (auto& m : mean) m /= static_cast<double>(samples.size());
      for (const auto& row : samples)
        for (std::size_t c = 0; c < cols; ++c) {
          const double d = row[c] - mean[c];
          sd[c] += d * d;
        }
      for (auto& s : sd) s = std::sqrt(s / (static_cast<double>(samples.size()) - 1.0));
      result.err_i_incoh = sd[0];
      result.err_kappa = sd[1];
      for (std::size_t i = 0; i < nfree; ++i) {
        const double e = sd[2 + i];
        if (box.which[i] == FreeParam::theta) result.err_theta = e;
        else if (box.which[i] == FreeParam::sigma_z) result.err_sigma_z = e;
        else result.err_delta_u = e;
      }
    }
  }

  return result;
}

double visibility_from_fit(const PatternModel& model, const FitParams& p,
                           double u_lo, double u_hi) {
  if (!(u_lo < u_hi)) throw ValidationError("visibility interval is empty");
  const int n = 2001;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int i = 0; i < n; ++i) {
    const double u = u_lo + (u_hi - u_lo) * i / (n - 1);
    const double v = p.i_incoh + p.kappa * model.shape(u, p);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(hi + lo > 0.0)) throw ValidationError("model pattern has no intensity");
  return (hi - lo) / (hi + lo);
}

}  // namespace ionfringe
