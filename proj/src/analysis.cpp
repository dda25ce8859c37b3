#include "ionfringe/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <functional>
#include <limits>
#include <string>
#include <thread>

#include "ionfringe/errors.hpp"
#include "ionfringe/peak_search.hpp"
#include "ionfringe/rng.hpp"

namespace ionfringe {

namespace {

int worker_count(int jobs) {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("IONFRINGE_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) n = v;
  }
  return std::clamp(n, 1, std::max(jobs, 1));
}

// Index-parallel loop; each job writes only its own slot, so the result is
// identical to the serial order regardless of scheduling.
void parallel_for(int jobs, const std::function<void(int)>& body) {
  const int workers = worker_count(jobs);
  if (workers <= 1) {
    for (int i = 0; i < jobs; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w]() {
      for (int i = w; i < jobs; i += workers) body(i);
    });
  for (auto& t : pool) t.join();
}

double effective_wavenumber(const OpticsConfig& optics) {
  return (1.0 - std::cos(optics.theta)) * 2.0 * constants::pi / optics.wavelength;
}

// Central adjacent gap of the dimensionless chain; the tightest pair.
double inner_gap(const std::vector<double>& u) {
  if (u.size() < 2) throw ValidationError("pair width needs at least two ions");
  const std::size_t i = (u.size() - 1) / 2;
  return u[i + 1] - u[i];
}

double scaled_length(const TrapConfig& trap, int n_ions, double u_tip) {
  return length_scale(trap, axial_frequency(trap, u_tip) * trap.axial_scale(n_ions));
}

// Voltage whose length scale equals l, inverting the calibration curve.
double voltage_for_length(const TrapConfig& trap, int n_ions, double l) {
  const double omega2 = trap.ion_charge * trap.ion_charge /
                        (4.0 * constants::pi * constants::vacuum_permittivity *
                         trap.ion_mass * l * l * l);
  const double f = std::sqrt(omega2) / (2.0 * constants::pi);
  const double a = trap.calib_a * trap.axial_scale(n_ions);
  return trap.calib_u0 + (f / a) * (f / a);
}

}  // namespace

VisibilityEstimate visibility_extremal(const MeasuredScan& scan) {
  if (scan.points.size() < 2)
    throw ValidationError("visibility needs at least two points");
  VisibilityEstimate est;
  est.background = scan.background_cps;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& p : scan.points) {
    double r = p.rate - scan.background_cps;
    if (r < 0.0) {
      r = 0.0;
      est.clamped = true;
    }
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  if (!(hi + lo > 0.0))
    throw ValidationError("scan has no signal above the background");
  est.i_max = hi;
  est.i_min = lo;
  est.v = (hi - lo) / (hi + lo);
  return est;
}

double background_subtracted_visibility(double v_raw, double extremes_sum,
                                        double background) {
  if (!(v_raw >= 0.0)) throw ValidationError("visibility must be non-negative");
  if (!(background >= 0.0)) throw ValidationError("background must be non-negative");
  if (!(extremes_sum > 2.0 * background))
    throw ValidationError("extremes do not rise above twice the background");
  return v_raw * extremes_sum / (extremes_sum - 2.0 * background);
}

FwhmResult fwhm_of_max_peak(const std::vector<PatternPoint>& pattern,
                            const TrapConfig& trap, int n_ions,
                            const OpticsConfig& optics, PairConvention pair) {
  std::vector<double> xs, ys;
  xs.reserve(pattern.size());
  ys.reserve(pattern.size());
  for (const auto& p : pattern) {
    xs.push_back(p.u_tip);
    ys.push_back(p.intensity);
  }
  const HalfMaxWidth w = fwhm_on_grid(xs, ys);
  if (w.samples_above < 9)
    throw ValidationError(
        "peak is undersampled: only " + std::to_string(w.samples_above) +
        " samples above half maximum, need at least 9");

  const std::vector<double> u = solve_positions(n_ions);
  double gap_u;
  if (pair == PairConvention::innermost) {
    gap_u = inner_gap(u);
  } else {
    if (n_ions < 2) throw ValidationError("pair width needs at least two ions");
    gap_u = (u.back() - u.front()) / (n_ions - 1);
  }

  FwhmResult out;
  out.u_peak = w.x_peak;
  out.width_v = w.width;
  out.left_truncated = w.left_truncated;
  out.right_truncated = w.right_truncated;

  const double l = scaled_length(trap, n_ions, w.x_peak);
  out.pair_distance = gap_u * l;
  // l(U) ~ (U - u0)^(-1/3), so dl/dU = -l / (3 (U - u0)).
  const double dl_du = l / (3.0 * (w.x_peak - trap.calib_u0));
  out.width_m = gap_u * dl_du * w.width;
  out.width_rad = out.width_m * effective_wavenumber(optics);
  return out;
}

std::vector<ScalingPoint> peak_intensity_scaling(const std::vector<int>& n_list,
                                                 const TrapConfig& trap,
                                                 const OpticsConfig& optics,
                                                 double u_lo, double u_hi) {
  if (!(u_lo < u_hi)) throw ValidationError("voltage window is empty");
  const double k_eff = effective_wavenumber(optics);

  std::vector<ScalingPoint> out(n_list.size());
  for (std::size_t idx = 0; idx < n_list.size(); ++idx) {
    const int n = n_list[idx];
    if (n == 1) {
      // one emitter has no geometry to scan
      out[idx] = {1, 1.0, u_lo};
      continue;
    }
    const std::vector<double> u = solve_positions(n);
    // The pattern in s = k_eff * length_scale(U) is voltage-free:
    //   I(s) = |sum_j exp(i s u_j)|^2.
    const double s_lo = k_eff * scaled_length(trap, n, u_hi);
    const double s_hi = k_eff * scaled_length(trap, n, u_lo);
    auto intensity = [&u](double s) {
      std::complex<double> field(0.0, 0.0);
      for (double uj : u) field += std::exp(std::complex<double>(0.0, s * uj));
      return std::norm(field);
    };
    // Fastest oscillation in s has period ~ pi / u_max; keep dozens of
    // samples per period so no principal fringe slips between grid points.
    const double u_max = std::max(std::fabs(u.front()), std::fabs(u.back()));
    const double pitch = 2.0 * constants::pi / (50.0 * n * u_max);
    const int points = static_cast<int>(std::ceil((s_hi - s_lo) / pitch)) + 2;
    const GridMax m = max_on_grid(intensity, s_lo, s_hi, points, 1e-4);
    out[idx] = {n, m.value, voltage_for_length(trap, n, m.x / k_eff)};
  }
  return out;
}

JitterResult jittered_equidistant_mc(const MonteCarloConfig& cfg, int n_ions,
                                     const TrapConfig& trap, const OpticsConfig& optics,
                                     double u_lo, double u_hi) {
  if (n_ions < 2) throw ValidationError("ensemble needs at least two ions");
  if (cfg.realizations < 1) throw ValidationError("need at least one realization");
  if (!(cfg.sigma_p >= 0.0)) throw ValidationError("position spread must be non-negative");
  if (!(u_lo < u_hi)) throw ValidationError("voltage window is empty");

  const double k_eff = effective_wavenumber(optics);
  const std::vector<double> u = solve_positions(n_ions);
  const double gap = inner_gap(u);
  const double spacing =
      cfg.spacing > 0.0 ? cfg.spacing : gap * scaled_length(trap, n_ions, u_lo);

  // Sweep covers the same inner-pair phase interval the harmonic chain sees
  // across the voltage window; the configuration is rigid while it scales.
  const double x_hi = k_eff * spacing;
  const double x_lo = x_hi * scaled_length(trap, n_ions, u_hi) /
                      scaled_length(trap, n_ions, u_lo);

  JitterResult result;
  result.maxima.assign(cfg.realizations, 0.0);
  parallel_for(cfg.realizations, [&](int rep) {
    CounterRng rng(cfg.seed, static_cast<std::uint64_t>(rep));
    std::vector<double> p(n_ions);
    for (int j = 0; j < n_ions; ++j)
      p[j] = j + cfg.sigma_p * rng.normal() / spacing;
    auto intensity = [&p](double x) {
      std::complex<double> field(0.0, 0.0);
      for (double pj : p) field += std::exp(std::complex<double>(0.0, x * pj));
      return std::norm(field);
    };
    double span = 0.0;
    for (double pj : p) span = std::max(span, std::fabs(pj));
    const double pitch = 2.0 * constants::pi / (50.0 * n_ions * std::max(span, 1.0));
    const int points = static_cast<int>(std::ceil((x_hi - x_lo) / pitch)) + 2;
    result.maxima[rep] = max_on_grid(intensity, x_lo, x_hi, points, 1e-4).value;
  });

  double mean = 0.0;
  for (double v : result.maxima) mean += v;
  mean /= static_cast<double>(result.maxima.size());
  double var = 0.0;
  for (double v : result.maxima) var += (v - mean) * (v - mean);
  var = result.maxima.size() > 1
            ? var / (static_cast<double>(result.maxima.size()) - 1.0)
            : 0.0;
  result.mean_max = mean;
  result.sd_max = std::sqrt(var);
  return result;
}

}  // namespace ionfringe
