#include "microtrap/optics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "microtrap/constants.hpp"

namespace microtrap::optics {

using constants::pi;

void LensArraySpec::validate() const {
  if (!(lens_diameter_m > 0.0) || !(pitch_m >= lens_diameter_m))
    throw std::domain_error("lens array: need pitch >= lens diameter > 0");
  if (!(numerical_aperture > 0.0) || !(numerical_aperture < 1.0))
    throw std::domain_error("lens array: need 0 < NA < 1");
  if (rows < 1 || cols < 1)
    throw std::domain_error("lens array: need rows, cols >= 1");
  if (!(demagnification > 0.0))
    throw std::domain_error("lens array: need demagnification > 0");
}

TrapParams derive_trap_params(double waist_m, double depth_j,
                              double wavelength_m, double atom_mass_kg) {
  if (!(waist_m > 0.0))
    throw std::domain_error("derive_trap_params: waist must be > 0");
  if (!(wavelength_m > 0.0))
    throw std::domain_error("derive_trap_params: wavelength must be > 0");
  if (!(atom_mass_kg > 0.0))
    throw std::domain_error("derive_trap_params: atom mass must be > 0");
  if (!(depth_j >= 0.0))
    throw std::domain_error("derive_trap_params: depth must be >= 0");

  TrapParams p;
  p.waist_m = waist_m;
  p.wavelength_m = wavelength_m;
  p.depth_j = depth_j;
  p.atom_mass_kg = atom_mass_kg;
  p.rayleigh_m = pi * waist_m * waist_m / wavelength_m;
  p.omega_r = std::sqrt(4.0 * depth_j / (atom_mass_kg * waist_m * waist_m));
  p.omega_z =
      std::sqrt(2.0 * depth_j / (atom_mass_kg * p.rayleigh_m * p.rayleigh_m));
  return p;
}

double lens_focal_length(const LensArraySpec& spec, NaConvention convention) {
  spec.validate();
  double half = convention == NaConvention::half_pitch_over_f
                    ? 0.5 * spec.pitch_m
                    : 0.5 * spec.lens_diameter_m;
  return half / spec.numerical_aperture;
}

double angle_to_shift(double theta_rad, const LensArraySpec& spec,
                      const SteeringConfig& steering) {
  if (!(steering.telescope_magnification > 0.0))
    throw std::domain_error("steering: telescope magnification must be > 0");
  if (!(steering.deflector_range_rad > 0.0))
    throw std::domain_error("steering: deflector range must be > 0");

  double array_angle = steering.telescope_magnification * theta_rad;
  if (std::abs(array_angle) > steering.deflector_range_rad) {
    double max_shift = lens_focal_length(spec, steering.na_convention) *
                       std::tan(steering.deflector_range_rad) /
                       spec.demagnification;
    throw std::out_of_range(
        "angle_to_shift: |V*theta| exceeds the deflector range; maximum "
        "reachable shift is " +
        std::to_string(max_shift * 1e6) + " um");
  }
  double f = lens_focal_length(spec, steering.na_convention);
  return f * std::tan(array_angle) / spec.demagnification;
}

RegisterPosition piezo_shift(const RegisterPosition& pos, double dx_m,
                             double dy_m, double max_travel_m) {
  RegisterPosition out{pos.offset_x_m + dx_m, pos.offset_y_m + dy_m};
  if (std::abs(out.offset_x_m) > max_travel_m ||
      std::abs(out.offset_y_m) > max_travel_m) {
    throw std::out_of_range("piezo_shift: offset exceeds max travel of " +
                            std::to_string(max_travel_m * 1e6) + " um");
  }
  return out;
}

double piezo_min_ramp_time(double resonance_hz, double safety_factor) {
  if (!(resonance_hz > 0.0))
    throw std::domain_error("piezo_min_ramp_time: resonance must be > 0");
  if (!(safety_factor >= 1.0))
    throw std::domain_error("piezo_min_ramp_time: safety factor must be >= 1");
  return safety_factor / resonance_hz;
}

std::vector<std::array<double, 2>> site_positions(const LensArraySpec& spec,
                                                  const RegisterPosition& pos) {
  spec.validate();
  double spacing = spec.site_spacing_m();
  std::vector<std::array<double, 2>> out;
  out.reserve(static_cast<std::size_t>(spec.rows) * spec.cols);
  for (int r = 0; r < spec.rows; ++r)
    for (int c = 0; c < spec.cols; ++c)
      out.push_back({c * spacing + pos.offset_x_m, r * spacing + pos.offset_y_m});
  return out;
}

}  // namespace microtrap::optics
