#pragma once

// SI <-> dimensionless conversions. Everything inside the library uses
// hbar = c = 1; these helpers exist only for inputs and reports.

#include <cmath>

#include "errors.hpp"

namespace mixedness::units {

// CODATA 2018 exact / recommended values.
namespace codata {
inline constexpr double hbar = 1.054571817e-34;        // J s
inline constexpr double c = 299792458.0;               // m / s
inline constexpr double k_B = 1.380649e-23;            // J / K
inline constexpr double eV = 1.602176634e-19;          // J
inline constexpr double electron_mass = 9.1093837015e-31;  // kg
inline constexpr double bohr_radius = 5.29177210903e-11;   // m
}  // namespace codata

inline constexpr double picometre = 1e-12;

inline double mass_from_eV(double rest_energy_eV) { return rest_energy_eV * codata::eV / (codata::c * codata::c); }

/// ell M c / hbar.
inline double size_mass_ratio(double ell_m, double mass_kg) { return ell_m * mass_kg * codata::c / codata::hbar; }

/// k_B T / (M c^2).
inline double thermal_mass_ratio(double temperature_K, double mass_kg) {
  return codata::k_B * temperature_K / (mass_kg * codata::c * codata::c);
}

/// k_B T x / (hbar c) for a length x (support size or cavity length).
inline double thermal_length_ratio(double temperature_K, double length_m) {
  return codata::k_B * temperature_K * length_m / (codata::hbar * codata::c);
}

/// Temperature at which a gap hbar*Omega has Boltzmann factor z.
inline double temperature_for_z(double z, double gap_eV) {
  if (!(z > 0.0 && z < 1.0)) throw ValidationError("temperature_for_z: z must lie in (0, 1)");
  return gap_eV * codata::eV / (codata::k_B * -std::log(z));
}

}  // namespace mixedness::units
