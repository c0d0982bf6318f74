#pragma once

#include <numbers>

// Fundamental constants, CODATA 2018, SI units. Fixed at build time.
namespace ringqc::constants {

inline constexpr double pi = std::numbers::pi_v<double>;

inline constexpr double elementary_charge = 1.602176634e-19;    // C (exact)
inline constexpr double vacuum_permittivity = 8.8541878128e-12; // F/m
inline constexpr double boltzmann = 1.380649e-23;               // J/K (exact)
inline constexpr double reduced_planck = 1.054571817e-34;       // J s
inline constexpr double atomic_mass_unit = 1.66053906660e-27;   // kg
inline constexpr double speed_of_light = 299792458.0;           // m/s (exact)

// k_e = 1/(4 pi eps0)
inline constexpr double coulomb_constant =
    1.0 / (4.0 * pi * vacuum_permittivity);

inline constexpr double electron_volt = elementary_charge; // J

} // namespace ringqc::constants
