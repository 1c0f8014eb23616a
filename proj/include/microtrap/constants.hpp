#pragma once

#include <numbers>

// Physical constants and unit helpers shared by all modules. Everything
// internal runs in SI (m, s, kg, J, rad/s); config files carry explicit
// units in their field names and are converted at the boundary.

namespace microtrap::constants {

inline constexpr double pi = std::numbers::pi;

// CODATA 2018
inline constexpr double hbar = 1.054571817e-34;         // J s
inline constexpr double k_boltzmann = 1.380649e-23;     // J/K

// 85Rb atomic mass
inline constexpr double rb85_mass_kg = 1.4099e-25;      // kg

}  // namespace microtrap::constants

namespace microtrap::units {

inline constexpr double from_um(double x) { return x * 1e-6; }
inline constexpr double to_um(double x) { return x * 1e6; }
inline constexpr double from_nm(double x) { return x * 1e-9; }
inline constexpr double from_ms(double x) { return x * 1e-3; }
inline constexpr double from_us(double x) { return x * 1e-6; }
inline constexpr double from_deg(double x) { return x * constants::pi / 180.0; }
inline constexpr double to_deg(double x) { return x * 180.0 / constants::pi; }

// trap depth quoted as k_B times a temperature in mK
inline constexpr double depth_from_mk(double mk) {
  return constants::k_boltzmann * mk * 1e-3;
}
inline constexpr double depth_to_mk(double joules) {
  return joules / (constants::k_boltzmann * 1e-3);
}

// angular frequency for a quoted linear frequency
inline constexpr double omega_from_khz(double khz) {
  return 2.0 * constants::pi * khz * 1e3;
}

}  // namespace microtrap::units
