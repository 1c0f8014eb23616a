#pragma once

#include <array>
#include <vector>

// Microlens-array register geometry: per-site trap parameters derived from
// beam and lens specs, steering-angle and piezo position control. All
// operations are pure; values are immutable once constructed.

namespace microtrap::optics {

// Focal-length convention for a lens quoted by numerical aperture. Vendors
// (and our two register generations) differ on whether NA refers to the
// half pitch or the half clear-aperture diameter.
enum class NaConvention {
  half_pitch_over_f,
  half_diameter_over_f,
};

struct LensArraySpec {
  double pitch_m = 0.0;
  double lens_diameter_m = 0.0;
  double numerical_aperture = 0.0;
  int rows = 1;
  int cols = 1;
  double demagnification = 1.0;  // 1 = focal plane used directly

  // pitch >= diameter > 0, 0 < NA < 1, rows/cols >= 1, demag > 0
  void validate() const;

  // center-to-center trap distance in the (possibly demagnified) focal plane
  double site_spacing_m() const { return pitch_m / demagnification; }
};

// Gaussian-beam dipole trap at one register site.
struct TrapParams {
  double waist_m = 0.0;       // w0, 1/e^2 radius at focus
  double wavelength_m = 0.0;
  double depth_j = 0.0;       // U0
  double atom_mass_kg = 0.0;
  // derived
  double rayleigh_m = 0.0;    // z_R = pi w0^2 / lambda
  double omega_r = 0.0;       // sqrt(4 U0 / (m w0^2)), rad/s
  double omega_z = 0.0;       // sqrt(2 U0 / (m z_R^2)), rad/s
};

struct SteeringConfig {
  double telescope_magnification = 1.0;   // V; maps deflector angle to array angle
  double deflector_range_rad = 0.0;       // usable |V * theta|
  NaConvention na_convention = NaConvention::half_pitch_over_f;
};

// Rigid in-plane offset of the whole register (piezo stage position).
struct RegisterPosition {
  double offset_x_m = 0.0;
  double offset_y_m = 0.0;
};

// Fill in z_R, omega_r, omega_z for a focused-beam trap.
TrapParams derive_trap_params(double waist_m, double depth_j,
                              double wavelength_m, double atom_mass_kg);

double lens_focal_length(const LensArraySpec& spec, NaConvention convention);

// Lateral focus displacement for an incident-angle change theta at the
// deflector: f * tan(V * theta), reduced by the re-imaging demagnification.
// Odd and strictly increasing in theta over the usable range.
double angle_to_shift(double theta_rad, const LensArraySpec& spec,
                      const SteeringConfig& steering);

// Translate the register rigidly; each offset component must stay within
// max_travel.
RegisterPosition piezo_shift(const RegisterPosition& pos, double dx_m,
                             double dy_m, double max_travel_m);

// Minimum smooth ramp duration that stays clear of the stage's mechanical
// resonance: safety_factor / resonance frequency.
double piezo_min_ramp_time(double resonance_hz, double safety_factor);

// Row-major site coordinates: (col, row) * spacing, translated by pos.
std::vector<std::array<double, 2>> site_positions(const LensArraySpec& spec,
                                                  const RegisterPosition& pos);

}  // namespace microtrap::optics
