#pragma once

// CODATA 2018 values, SI units.
namespace ionfringe::constants {

inline constexpr double elementary_charge = 1.602176634e-19;   // C
inline constexpr double vacuum_permittivity = 8.8541878128e-12; // F/m
inline constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg
inline constexpr double speed_of_light = 299792458.0;          // m/s
inline constexpr double pi = 3.14159265358979323846;

}  // namespace ionfringe::constants
