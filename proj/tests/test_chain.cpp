#include <doctest.h>

#include <cmath>
#include <vector>

#include "ionfringe/chain.hpp"
#include "ionfringe/constants.hpp"
#include "ionfringe/errors.hpp"
#include "ionfringe/trap.hpp"
#include "oracles.hpp"

using namespace ionfringe;

namespace {

double max_force_residual(const std::vector<double>& u) {
  double worst = 0.0;
  for (std::size_t m = 0; m < u.size(); ++m) {
    double f = u[m];
    for (std::size_t p = 0; p < u.size(); ++p) {
      if (p == m) continue;
      const double d = u[m] - u[p];
      f -= (d > 0 ? 1.0 : -1.0) / (d * d);
    }
    worst = std::max(worst, std::fabs(f));
  }
  return worst;
}

TrapConfig calibrated_trap() {
  TrapConfig trap;
  auto [a, u0] = calibrate_axial({{4.0, 60e3}, {900.0, 1044e3}});
  trap.calib_a = a;
  trap.calib_u0 = u0;
  return trap;
}

}  // namespace

TEST_CASE("single ion sits at the trap center") {
  const auto u = solve_positions(1);
  REQUIRE(u.size() == 1);
  CHECK(u[0] == 0.0);
}

TEST_CASE("two and three ion positions match the closed forms") {
  // Roots of the force balance: +-(1/4)^(1/3) and +-(5/4)^(1/3), 0.
  const auto u2 = solve_positions(2);
  CHECK(std::fabs(u2[0] + 0.6299605249474366) < 1e-12);
  CHECK(std::fabs(u2[1] - 0.6299605249474366) < 1e-12);

  const auto u3 = solve_positions(3);
  CHECK(std::fabs(u3[0] + 1.0772173450159418) < 1e-12);
  CHECK(std::fabs(u3[1]) < 1e-12);
  CHECK(std::fabs(u3[2] - 1.0772173450159418) < 1e-12);
}

TEST_CASE("newton positions agree with gradient descent on the energy") {
  for (int n : {2, 3, 4, 5, 8, 13, 20}) {
    CAPTURE(n);
    const auto u = solve_positions(n);
    const auto v = oracle::chain_positions(n);
    REQUIRE(u.size() == v.size());
    for (int i = 0; i < n; ++i) CHECK(std::fabs(u[i] - v[i]) < 1e-8);
  }
}

TEST_CASE("equilibria satisfy the force balance and are ordered") {
  for (int n : {1, 2, 5, 10, 30, 53, 100, 200}) {
    CAPTURE(n);
    const auto u = solve_positions(n);
    CHECK(max_force_residual(u) < 1e-10);
    for (int i = 1; i < n; ++i) CHECK(u[i] > u[i - 1]);
    // Reflection symmetry comes out of the physics, not an enforced step.
    for (int i = 0; i < n; ++i) CHECK(std::fabs(u[i] + u[n - 1 - i]) < 1e-9);
  }
}

TEST_CASE("frozen extremes for larger chains") {
  const auto u10 = solve_positions(10);
  CHECK(u10.back() == doctest::Approx(2.8708245).epsilon(1e-6));
  const auto u53 = solve_positions(53);
  CHECK(u53.back() == doctest::Approx(7.1270306).epsilon(1e-6));
}

TEST_CASE("ion count limits are enforced") {
  CHECK_THROWS_AS(solve_positions(0), ValidationError);
  CHECK_THROWS_AS(solve_positions(-3), ValidationError);
  CHECK_THROWS_AS(solve_positions(201), ValidationError);
}

TEST_CASE("two point calibration reproduces its inputs exactly") {
  const auto [a, u0] = calibrate_axial({{4.0, 60e3}, {900.0, 1044e3}});
  CHECK(a * std::sqrt(4.0 - u0) == doctest::Approx(60e3).epsilon(1e-12));
  CHECK(a * std::sqrt(900.0 - u0) == doctest::Approx(1044e3).epsilon(1e-12));
  // Frozen values for the stock endpoint pair.
  CHECK(a == doctest::Approx(34819.94).epsilon(1e-5));
  CHECK(u0 == doctest::Approx(1.030748).epsilon(1e-4));
}

TEST_CASE("overdetermined calibration recovers exact synthetic parameters") {
  const double a_true = 3.3e4, u0_true = 0.8;
  std::vector<CalibrationPoint> pts;
  for (double u : {2.0, 5.0, 20.0, 120.0, 700.0})
    pts.push_back({u, a_true * std::sqrt(u - u0_true)});
  const auto [a, u0] = calibrate_axial(pts);
  CHECK(a == doctest::Approx(a_true).epsilon(1e-9));
  CHECK(u0 == doctest::Approx(u0_true).epsilon(1e-7));
}

TEST_CASE("calibration rejects unusable inputs") {
  CHECK_THROWS_AS(calibrate_axial({{4.0, 60e3}}), ValidationError);
  CHECK_THROWS_AS(calibrate_axial({{4.0, 60e3}, {4.0, 70e3}}), ValidationError);
  // Frequency falling with voltage puts the offset above the data range.
  CHECK_THROWS_AS(calibrate_axial({{4.0, 100e3}, {900.0, 60e3}}), ValidationError);
}

TEST_CASE("axial frequency and length scale at reference points") {
  const TrapConfig trap = calibrated_trap();
  CHECK(axial_frequency(trap, 5.3) == doctest::Approx(71945.5).epsilon(1e-4));
  CHECK_THROWS_AS(axial_frequency(trap, trap.calib_u0), ValidationError);
  CHECK_THROWS_AS(axial_frequency(trap, 0.5), ValidationError);

  // l = (q^2 / (4 pi eps0 M w^2))^(1/3) for a calcium ion at 1 MHz.
  TrapConfig direct = trap;
  CHECK(length_scale(direct, 1e6) == doctest::Approx(4.447655e-6).epsilon(1e-6));
  // Scale falls as f^(-2/3).
  CHECK(length_scale(direct, 2e6) / length_scale(direct, 1e6) ==
        doctest::Approx(std::pow(2.0, -2.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("chain geometry composes calibration, scale and positions") {
  const TrapConfig trap = calibrated_trap();
  const IonChain chain = chain_geometry(trap, 53, 5.3);
  CHECK(chain.f_z == doctest::Approx(71945.5).epsilon(1e-4));
  CHECK(chain.scale == doctest::Approx(25.7116e-6).epsilon(1e-4));
  CHECK(chain.length() == doctest::Approx(366.49e-6).epsilon(1e-3));
  CHECK(chain.z(0) == doctest::Approx(-chain.z(52)).epsilon(1e-9));
}

TEST_CASE("chain length shrinks as confinement stiffens") {
  const TrapConfig trap = calibrated_trap();
  double prev = 1e9;
  for (double u_tip : {5.0, 20.0, 100.0, 500.0}) {
    const IonChain chain = chain_geometry(trap, 10, u_tip);
    CHECK(chain.length() < prev);
    prev = chain.length();
  }
}

TEST_CASE("minimum spacing tightens as ions are added") {
  double prev = 1e9;
  for (int n : {2, 5, 10, 20, 40}) {
    IonChain chain;
    chain.n_ions = n;
    chain.u = solve_positions(n);
    CHECK(chain.min_spacing_u() < prev);
    prev = chain.min_spacing_u();
  }
}

TEST_CASE("per count scale overrides multiply the axial frequency") {
  TrapConfig trap = calibrated_trap();
  trap.com_scale_n = {7};
  trap.com_scale_factor = {1.25};
  CHECK(trap.axial_scale(7) == doctest::Approx(1.25).epsilon(1e-15));
  CHECK(trap.axial_scale(8) == doctest::Approx(1.0).epsilon(1e-15));
  const IonChain plain = chain_geometry(trap, 8, 5.3);
  const IonChain scaled = chain_geometry(trap, 7, 5.3);
  CHECK(scaled.f_z / plain.f_z == doctest::Approx(1.25).epsilon(1e-12));
  // the length scale follows the frequency as f_z^(-2/3)
  const double ratio = scaled.scale / plain.scale;
  CHECK(ratio == doctest::Approx(std::pow(1.25, -2.0 / 3.0)).epsilon(1e-12));
}
