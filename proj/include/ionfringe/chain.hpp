#pragma once

#include <vector>

#include "ionfringe/trap.hpp"

namespace ionfringe {

// Equilibrium geometry of n like charges in a harmonic axial well.
// Dimensionless coordinates u are in units of the Coulomb length scale;
// physical positions are z_i = scale * u[i], measured from the chain center.
struct IonChain {
  int n_ions = 0;
  double u_tip = 0.0;  // V
  double f_z = 0.0;    // Hz, includes any per-count scale
  double scale = 0.0;  // m
  std::vector<double> u;  // ascending, antisymmetric about 0

  double z(int i) const { return scale * u[i]; }
  double length() const { return (u.back() - u.front()) * scale; }
  double min_spacing_u() const;
  double mean_spacing_u() const;
};

// Dimensionless equilibrium positions for n ions, ascending. Stationarity of
// U(u) = sum u_m^2 / 2 + sum_{m<p} 1/(u_p - u_m) gives the force balance
//   u_m - sum_{p<m} (u_m - u_p)^-2 + sum_{p>m} (u_m - u_p)^-2 = 0,
// solved by damped Newton iteration from a uniformly spaced initial guess
// with extent proportional to n^(2/3); falls back to gradient descent on
// U(u) if Newton stalls. Final max residual is below 1e-10 or a
// ConvergenceError carrying the residual is thrown. Valid for n in [1, 200].
// Antisymmetry of the result is checked, not enforced.
std::vector<double> solve_positions(int n);

// Composition: calibrated frequency -> length scale -> scaled positions.
IonChain chain_geometry(const TrapConfig& trap, int n, double u_tip);

}  // namespace ionfringe
