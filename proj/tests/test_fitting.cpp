#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "ionfringe/constants.hpp"
#include "ionfringe/errors.hpp"
#include "ionfringe/fitting.hpp"
#include "ionfringe/interference.hpp"
#include "ionfringe/trap.hpp"
#include "oracles.hpp"

using namespace ionfringe;

namespace {

TrapConfig test_trap() {
  TrapConfig trap;
  const auto ab = calibrate_axial({{4.0, 60e3}, {900.0, 1044e3}});
  trap.calib_a = ab.first;
  trap.calib_u0 = ab.second;
  return trap;
}

MeasuredScan make_scan(const std::vector<double>& u, const std::vector<double>& rate,
                       const std::vector<double>& err, int n_ions) {
  MeasuredScan scan;
  scan.n_ions = n_ions;
  for (std::size_t i = 0; i < u.size(); ++i)
    scan.points.push_back({u[i], rate[i], err[i]});
  return scan;
}

std::vector<double> voltage_grid(double lo, double hi, int n) {
  std::vector<double> u(n);
  for (int i = 0; i < n; ++i) u[i] = lo + (hi - lo) * i / (n - 1);
  return u;
}

PatternModel two_ion_model(const TrapConfig& trap, const OpticsConfig& optics) {
  DephasingConfig deph;
  deph.saturation_visibility_factor = 0.66;
  deph.mode_variances = {{ModeAxis::axial, 2.5e-15}, {ModeAxis::radial, 1.6e-15}};
  return PatternModel(trap, 2, optics, make_profile(ProfileKind::uniform, 2), deph);
}

}  // namespace

TEST_CASE("linear rate fit recovers exact synthetic data") {
  const TrapConfig trap = test_trap();
  OpticsConfig optics;
  const PatternModel model = two_ion_model(trap, optics);
  const FitParams p = FitParams::neutral(optics);
  const auto grid = voltage_grid(4.5, 12.0, 60);
  std::vector<double> rate, err, shape;
  for (double u : grid) {
    shape.push_back(model.shape(u, p));
    rate.push_back(2.5 + 7.0 * shape.back());
    err.push_back(1.0);
  }
  const MeasuredScan scan = make_scan(grid, rate, err, 2);
  const LinearFit fit = fit_linear(scan, shape);
  CHECK(fit.i_incoh == doctest::Approx(2.5).epsilon(1e-10));
  CHECK(fit.kappa == doctest::Approx(7.0).epsilon(1e-10));
  CHECK(fit.chi2 == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK_FALSE(fit.on_boundary);
  REQUIRE(fit.residuals.size() == scan.points.size());
  for (double r : fit.residuals) CHECK(std::fabs(r) < 1e-8);
}

TEST_CASE("linear rate fit matches an independent grid search") {
  const TrapConfig trap = test_trap();
  OpticsConfig optics;
  const PatternModel model = two_ion_model(trap, optics);
  const FitParams p = FitParams::neutral(optics);
  const auto grid = voltage_grid(4.5, 12.0, 45);
  std::vector<double> rate, err, shape;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    shape.push_back(model.shape(grid[i], p));
    // deterministic wiggle standing in for measurement noise
    rate.push_back(3.0 + 5.5 * shape.back() + 0.8 * std::sin(3.7 * i));
    err.push_back(0.6 + 0.05 * (i % 7));
  }
  const MeasuredScan scan = make_scan(grid, rate, err, 2);

  SUBCASE("inverse-variance weights") {
    const LinearFit fit = fit_linear(scan, shape);
    const oracle::GridFit ref = oracle::linear_fit_search(rate, err, shape, true);
    CHECK(fit.chi2 <= ref.chi2 * (1.0 + 1e-8));
    CHECK(fit.chi2 == doctest::Approx(ref.chi2).epsilon(1e-8));
    CHECK(fit.i_incoh == doctest::Approx(ref.b).epsilon(1e-5));
    CHECK(fit.kappa == doctest::Approx(ref.k).epsilon(1e-5));
  }
  SUBCASE("uniform weights") {
    const LinearFit fit = fit_linear(scan, shape, WeightMode::uniform);
    const oracle::GridFit ref = oracle::linear_fit_search(rate, err, shape, false);
    CHECK(fit.chi2 == doctest::Approx(ref.chi2).epsilon(1e-8));
    CHECK(fit.i_incoh == doctest::Approx(ref.b).epsilon(1e-5));
    CHECK(fit.kappa == doctest::Approx(ref.k).epsilon(1e-5));
  }
}

TEST_CASE("linear rate fit projects negative slopes onto the boundary") {
  const TrapConfig trap = test_trap();
  OpticsConfig optics;
  const PatternModel model = two_ion_model(trap, optics);
  const FitParams p = FitParams::neutral(optics);
  const auto grid = voltage_grid(4.5, 12.0, 40);
  std::vector<double> rate, err, shape;
  for (double u : grid) {
    shape.push_back(model.shape(u, p));
    rate.push_back(10.0 - 0.8 * shape.back());  // anti-correlated
    err.push_back(1.0);
  }
  const MeasuredScan scan = make_scan(grid, rate, err, 2);
  const LinearFit fit = fit_linear(scan, shape);
  CHECK(fit.on_boundary);
  CHECK(fit.kappa == 0.0);
  const oracle::GridFit ref = oracle::linear_fit_search(rate, err, shape, true);
  CHECK(fit.chi2 == doctest::Approx(ref.chi2).epsilon(1e-8));
}

TEST_CASE("linear rate fit rejects a constant shape") {
  const auto grid = voltage_grid(5.0, 9.0, 10);
  std::vector<double> rate(10, 5.0), err(10, 1.0), shape(10, 2.0);
  const MeasuredScan scan = make_scan(grid, rate, err, 2);
  CHECK_THROWS_AS(fit_linear(scan, shape), ValidationError);
}

TEST_CASE("inverse-variance weighting requires positive errors") {
  const TrapConfig trap = test_trap();
  OpticsConfig optics;
  const PatternModel model = two_ion_model(trap, optics);
  const FitParams p = FitParams::neutral(optics);
  const auto grid = voltage_grid(4.5, 12.0, 12);
  std::vector<double> rate, err, shape;
  for (double u : grid) {
    shape.push_back(model.shape(u, p));
    rate.push_back(1.0 + shape.back());
    err.push_back(1.0);
  }
  err[3] = 0.0;
  const MeasuredScan scan = make_scan(grid, rate, err, 2);
  CHECK_THROWS_AS(fit_linear(scan, shape), ValidationError);
}

TEST_CASE("fixed-geometry full fit reduces to the closed-form linear fit") {
  const TrapConfig trap = test_trap();
  OpticsConfig optics;
  const PatternModel model = two_ion_model(trap, optics);
  const FitParams p = FitParams::neutral(optics);
  const auto grid = voltage_grid(4.5, 12.0, 50);
  std::vector<double> rate, err, shape;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    shape.push_back(model.shape(grid[i], p));
    rate.push_back(4.0 + 6.0 * shape.back() + 0.5 * std::cos(2.1 * i));
    err.push_back(1.0);
  }
  const MeasuredScan scan = make_scan(grid, rate, err, 2);
  const FitResult full = fit_full(scan, model, {}, 1);
  const LinearFit lin = fit_linear(scan, shape);
  CHECK(full.params.i_incoh == doctest::Approx(lin.i_incoh).epsilon(1e-12));
  CHECK(full.params.kappa == doctest::Approx(lin.kappa).epsilon(1e-12));
  CHECK(full.chi2 == doctest::Approx(lin.chi2).epsilon(1e-12));
  CHECK(full.dof == static_cast<int>(scan.points.size()) - 2);
  CHECK(full.converged);
  // geometry parameters stay at the configured values
  CHECK(full.params.theta == optics.theta);
  CHECK(full.params.delta_u == 0.0);
}

TEST_CASE("noiseless scans round-trip through the full fit") {
  const TrapConfig trap = test_trap();
  OpticsConfig optics;
  const PatternModel model = two_ion_model(trap, optics);

  FitParams truth = FitParams::neutral(optics);
  truth.i_incoh = 4.0;
  truth.kappa = 9.0;
  truth.theta = optics.theta + 0.3 * constants::pi / 180.0;
  truth.delta_u = 0.12;

  const auto grid = voltage_grid(4.5, 12.0, 90);
  std::vector<double> rate, err;
  for (double u : grid) {
    rate.push_back(model.observed(u, truth));
    err.push_back(1.0);
  }
  const MeasuredScan scan = make_scan(grid, rate, err, 2);
  const FitResult fit = fit_full(scan, model, {FreeParam::theta, FreeParam::delta_u}, 3);
  CHECK(fit.converged);
  CHECK(fit.params.theta == doctest::Approx(truth.theta).epsilon(1e-6));
  CHECK(fit.params.delta_u == doctest::Approx(truth.delta_u).epsilon(1e-5));
  CHECK(fit.params.i_incoh == doctest::Approx(truth.i_incoh).epsilon(1e-5));
  CHECK(fit.params.kappa == doctest::Approx(truth.kappa).epsilon(1e-5));
  CHECK(fit.chi2 < 1e-12);
  // curvature-based errors exist and are small for a perfect fit
  CHECK(std::isfinite(fit.err_theta));
  CHECK(std::isfinite(fit.err_delta_u));
}

TEST_CASE("finite beam width round-trips through the full fit") {
  const TrapConfig trap = test_trap();
  OpticsConfig optics;
  optics.beam_sigma_z = 115e-6;
  DephasingConfig deph;
  deph.saturation_visibility_factor = 0.66;
  deph.mode_variances = {{ModeAxis::axial, 2.5e-15}, {ModeAxis::radial, 1.6e-15}};
  PatternModel model(trap, 53, optics, make_profile(ProfileKind::uniform, 53), deph);

  FitParams truth = FitParams::neutral(optics);
  truth.i_incoh = 6.0;
  truth.kappa = 3.0e-6;
  truth.sigma_z = 140e-6;

  const auto grid = voltage_grid(5.3, 12.0, 120);
  std::vector<double> rate, err;
  for (double u : grid) {
    rate.push_back(model.observed(u, truth));
    err.push_back(1.0);
  }
  const MeasuredScan scan = make_scan(grid, rate, err, 53);
  const FitResult fit = fit_full(scan, model, {FreeParam::sigma_z}, 5);
  CHECK(fit.converged);
  CHECK(fit.params.sigma_z == doctest::Approx(truth.sigma_z).epsilon(1e-6));
  CHECK(fit.params.kappa == doctest::Approx(truth.kappa).epsilon(1e-4));
  CHECK(fit.chi2 < 1e-10);
}

TEST_CASE("full fit is deterministic for a fixed seed") {
  const TrapConfig trap = test_trap();
  OpticsConfig optics;
  const PatternModel model = two_ion_model(trap, optics);
  FitParams truth = FitParams::neutral(optics);
  truth.i_incoh = 3.0;
  truth.kappa = 8.0;
  truth.delta_u = -0.07;
  const auto grid = voltage_grid(4.5, 12.0, 70);
  std::vector<double> rate, err;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    rate.push_back(model.observed(grid[i], truth) + 0.3 * std::sin(5.0 * i));
    err.push_back(1.0);
  }
  const MeasuredScan scan = make_scan(grid, rate, err, 2);
  const FitResult a = fit_full(scan, model, {FreeParam::delta_u}, 42);
  const FitResult b = fit_full(scan, model, {FreeParam::delta_u}, 42);
  CHECK(a.params.delta_u == b.params.delta_u);
  CHECK(a.params.i_incoh == b.params.i_incoh);
  CHECK(a.params.kappa == b.params.kappa);
  CHECK(a.chi2 == b.chi2);
  CHECK(a.err_delta_u == b.err_delta_u);
}

TEST_CASE("bootstrap errors are positive and finite") {
  const TrapConfig trap = test_trap();
  OpticsConfig optics;
  const PatternModel model = two_ion_model(trap, optics);
  FitParams truth = FitParams::neutral(optics);
  truth.i_incoh = 3.0;
  truth.kappa = 8.0;
  truth.delta_u = 0.05;
  const auto grid = voltage_grid(4.5, 12.0, 60);
  std::vector<double> rate, err;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    rate.push_back(model.observed(grid[i], truth) + 0.2 * std::sin(4.1 * i));
    err.push_back(0.7);
  }
  const MeasuredScan scan = make_scan(grid, rate, err, 2);
  FitOptions opt;
  opt.bootstrap = 16;
  const FitResult fit = fit_full(scan, model, {FreeParam::delta_u}, 11, opt);
  CHECK(fit.err_delta_u > 0.0);
  CHECK(std::isfinite(fit.err_delta_u));
}

TEST_CASE("full fit validates the point count") {
  const TrapConfig trap = test_trap();
  OpticsConfig optics;
  const PatternModel model = two_ion_model(trap, optics);
  const auto grid = voltage_grid(5.0, 9.0, 3);
  const MeasuredScan scan =
      make_scan(grid, {3.0, 4.0, 5.0}, {1.0, 1.0, 1.0}, 2);
  CHECK_THROWS_AS(fit_full(scan, model, {FreeParam::theta}, 1), ValidationError);
}

TEST_CASE("full fit fails honestly when the model carries no fringes") {
  // A single uniformly lit ion produces a voltage-independent shape, so the
  // geometry objective is degenerate at every trial point.
  const TrapConfig trap = test_trap();
  OpticsConfig optics;
  DephasingConfig deph;
  const PatternModel model(trap, 1, optics,
                           make_profile(ProfileKind::uniform, 1), deph);
  const auto grid = voltage_grid(4.5, 12.0, 40);
  std::vector<double> rate(grid.size(), 7.0), err(grid.size(), 1.0);
  const MeasuredScan scan = make_scan(grid, rate, err, 1);
  CHECK_THROWS_AS(fit_full(scan, model, {FreeParam::theta}, 1),
                  ConvergenceError);
}

TEST_CASE("boundary-pinned amplitudes are reported and carry no error bar") {
  const TrapConfig trap = test_trap();
  OpticsConfig optics;
  const PatternModel model = two_ion_model(trap, optics);
  const FitParams p = FitParams::neutral(optics);
  const auto grid = voltage_grid(4.5, 12.0, 40);
  std::vector<double> rate, err;
  for (double u : grid) {
    rate.push_back(10.0 - 0.8 * model.shape(u, p));
    err.push_back(1.0);
  }
  const MeasuredScan scan = make_scan(grid, rate, err, 2);
  const FitResult fit = fit_full(scan, model, {}, 1);
  CHECK(fit.on_boundary);
  bool kappa_pinned = false;
  for (const auto& name : fit.pinned) kappa_pinned |= name == "kappa";
  CHECK(kappa_pinned);
  CHECK(std::isnan(fit.err_kappa));
}

TEST_CASE("model visibility follows the offset-to-amplitude ratio") {
  const TrapConfig trap = test_trap();
  OpticsConfig optics;
  DephasingConfig full_contrast;  // factor 1, no modes
  PatternModel model(trap, 2, optics, make_profile(ProfileKind::uniform, 2),
                     full_contrast);
  FitParams p = FitParams::neutral(optics);
  p.kappa = 1.0;
  p.i_incoh = 2.0;
  // shape spans [0, 4]: visibility (4 - 0) / (4 + 0 + 2*i_incoh)
  CHECK(visibility_from_fit(model, p, 4.5, 12.0) ==
        doctest::Approx(4.0 / 8.0).epsilon(1e-3));
  p.i_incoh = 0.0;
  CHECK(visibility_from_fit(model, p, 4.5, 12.0) ==
        doctest::Approx(1.0).epsilon(1e-3));
}
