#pragma once

#include <utility>
#include <vector>

#include "ionfringe/constants.hpp"

namespace ionfringe {

// One measured operating point of the axial confinement.
struct CalibrationPoint {
  double u_tip;  // tip electrode voltage, V
  double f_z;    // axial center-of-mass frequency, Hz
};

// Trap and ion species parameters. The axial frequency follows
// f_z(U) = calib_a * sqrt(U - calib_u0) for U above calib_u0.
struct TrapConfig {
  double ion_mass = 40.0 * constants::atomic_mass_unit;  // kg
  double ion_charge = constants::elementary_charge;      // C
  double calib_a = 0.0;   // Hz per sqrt(V)
  double calib_u0 = 0.0;  // V
  double radial_freq = 1.66e6;  // Hz, transverse confinement

  // Optional per-ion-count scale on the axial frequency, parallel arrays.
  // Large crystals can shift the effective center-of-mass frequency away
  // from the single-ion calibration; default is no adjustment.
  std::vector<int> com_scale_n;
  std::vector<double> com_scale_factor;

  double axial_scale(int n_ions) const;
};

// Least-squares fit of (calib_a, calib_u0) to measured points, minimizing
// squared frequency residuals. Exact for two points. Throws ValidationError
// when fewer than two points are given, when two points share a voltage,
// or when the solution would put calib_u0 at or above the lowest voltage.
std::pair<double, double> calibrate_axial(const std::vector<CalibrationPoint>& points);

// f_z in Hz at the given tip voltage; throws ValidationError at or below calib_u0.
double axial_frequency(const TrapConfig& trap, double u_tip);

// Characteristic Coulomb length l = (q^2 / (4 pi eps0 M w_z^2))^(1/3), m.
double length_scale(const TrapConfig& trap, double f_z);

}  // namespace ionfringe
