#include "ionfringe/trap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ionfringe/errors.hpp"

namespace ionfringe {

double TrapConfig::axial_scale(int n_ions) const {
  for (std::size_t i = 0; i < com_scale_n.size() && i < com_scale_factor.size(); ++i)
    if (com_scale_n[i] == n_ions) return com_scale_factor[i];
  return 1.0;
}

namespace {

// Best amplitude for fixed offset, then the residual it leaves behind.
double profiled_residual(const std::vector<CalibrationPoint>& pts, double u0,
                         double* a_out) {
  double num = 0.0, den = 0.0;
  for (const auto& p : pts) {
    const double r = std::sqrt(p.u_tip - u0);
    num += p.f_z * r;
    den += p.u_tip - u0;
  }
  const double a = num / den;
  if (a_out) *a_out = a;
  double chi2 = 0.0;
  for (const auto& p : pts) {
    const double d = p.f_z - a * std::sqrt(p.u_tip - u0);
    chi2 += d * d;
  }
  return chi2;
}

}  // namespace

std::pair<double, double> calibrate_axial(const std::vector<CalibrationPoint>& points) {
  if (points.size() < 2)
    throw ValidationError("calibration needs at least two points");
  for (const auto& p : points)
    if (!(p.f_z > 0.0) || !std::isfinite(p.u_tip))
      throw ValidationError("calibration points need positive frequencies");
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      if (points[i].u_tip == points[j].u_tip)
        throw ValidationError("calibration points must have distinct voltages");

  double u_min = points[0].u_tip, u_max = points[0].u_tip;
  for (const auto& p : points) {
    u_min = std::min(u_min, p.u_tip);
    u_max = std::max(u_max, p.u_tip);
  }

  if (points.size() == 2) {
    const auto& p1 = points[0];
    const auto& p2 = points[1];
    const double a2 = (p2.f_z * p2.f_z - p1.f_z * p1.f_z) / (p2.u_tip - p1.u_tip);
    if (!(a2 > 0.0))
      throw ValidationError("frequency must increase with tip voltage");
    const double u0 = p1.u_tip - p1.f_z * p1.f_z / a2;
    if (!(u0 < u_min))
      throw ValidationError("calibration offset is not below the data range");
    return {std::sqrt(a2), u0};
  }

  // Overdetermined case: the amplitude has a closed form at fixed offset, so
  // minimize the profiled frequency residual over the offset alone. Seed the
  // bracket from the linear fit of f^2 against voltage, which is exact for
  // consistent data.
  double su = 0.0, sf = 0.0, suu = 0.0, suf = 0.0;
  const double n = static_cast<double>(points.size());
  for (const auto& p : points) {
    su += p.u_tip;
    sf += p.f_z * p.f_z;
    suu += p.u_tip * p.u_tip;
    suf += p.u_tip * p.f_z * p.f_z;
  }
  const double slope = (n * suf - su * sf) / (n * suu - su * su);
  if (!(slope > 0.0))
    throw ValidationError("frequency must increase with tip voltage");
  const double u0_seed = (su * slope - sf) / (n * slope);

  const double span = std::max(u_max - u_min, 1e-9);
  const double edge = u_min - 1e-10 * std::max(1.0, std::fabs(u_min));
  double lo = std::min(u0_seed, u_min) - 10.0 * span - 1.0;
  double hi = edge;

  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = profiled_residual(points, x1, nullptr);
  double f2 = profiled_residual(points, x2, nullptr);
  for (int it = 0; it < 300 && hi - lo > 1e-14 * std::max(1.0, std::fabs(hi)); ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = profiled_residual(points, x1, nullptr);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = profiled_residual(points, x2, nullptr);
    }
  }
  const double u0 = 0.5 * (lo + hi);
  double a = 0.0;
  profiled_residual(points, u0, &a);
  if (!(a > 0.0) || !std::isfinite(a) || !(u0 < u_min) || u0 >= edge)
    throw ValidationError("calibration offset is not below the data range");
  return {a, u0};
}

double axial_frequency(const TrapConfig& trap, double u_tip) {
  if (!(trap.calib_a > 0.0))
    throw ValidationError("axial calibration is not set");
  if (!(u_tip > trap.calib_u0))
    throw ValidationError("tip voltage is at or below the calibration offset");
  return trap.calib_a * std::sqrt(u_tip - trap.calib_u0);
}

double length_scale(const TrapConfig& trap, double f_z) {
  if (!(f_z > 0.0)) throw ValidationError("axial frequency must be positive");
  if (!(trap.ion_mass > 0.0)) throw ValidationError("ion mass must be positive");
  const double omega = 2.0 * constants::pi * f_z;
  const double l3 = trap.ion_charge * trap.ion_charge /
                    (4.0 * constants::pi * constants::vacuum_permittivity *
                     trap.ion_mass * omega * omega);
  return std::cbrt(l3);
}

}  // namespace ionfringe
