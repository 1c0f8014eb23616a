#pragma once

#include <span>
#include <vector>

// Motional heating of a harmonically trapped atom that is carried over a
// distance S in time T. The closed-form quanta count, its adiabatic
// envelope, the zero-heating times, and an independent forced-oscillator
// integrator that cross-checks the closed form.

namespace microtrap::transport {

// One transport event. The trajectory is the smooth sinusoidal ramp
// x(t) = (S/2) (1 - cos(pi t / T)), which starts and ends at rest.
struct TransportSpec {
  double distance_m = 0.0;   // S
  double duration_s = 0.0;   // T
  double omega0 = 0.0;       // trap angular frequency, rad/s
  double atom_mass_kg = 0.0;

  void validate() const;  // S >= 0, T > 0, omega0 > 0, m > 0
};

struct HeatingResult {
  double quanta = 0.0;     // <n>_add, vibrational quanta gained
  double energy_j = 0.0;   // quanta * hbar * omega0
  bool is_envelope = false;
};

// Comoving-frame oscillator coordinates (deviation from trap center).
struct OscillatorState {
  double q = 0.0;  // m
  double p = 0.0;  // kg m/s
};

// Average vibrational quanta gained by the ramp:
//   <n(T)>_add = m S^2 pi^4 w0 cos^2(w0 T / 2) / (hbar (pi^2 - w0^2 T^2)^2).
// The point w0 T = pi is a removable singularity; the finite limit
// m S^2 pi^2 w0 / (16 hbar) is returned there.
HeatingResult heating_added(const TransportSpec& spec);

// Upper bound on heating_added: the cos^2 factor replaced by 1. Defined
// only on the adiabatic branch w0 T > pi (below it the envelope has a pole
// and is meaningless); throws NotAdiabaticError otherwise.
HeatingResult heating_envelope(const TransportSpec& spec);

// Smallest T on the adiabatic branch with heating_envelope(T) <= n_max.
// Bisection on the monotone-decreasing envelope, relative tolerance 1e-6;
// throws NumericError with the bracket values if no bracket exists.
double min_transport_time(double distance_m, double omega0,
                          double atom_mass_kg, double n_max);

// Transport times with exactly zero gained quanta: T_k = (2k+1) pi / w0,
// k = 1..k_max. Consecutive zeros are one oscillation period apart.
std::vector<double> zero_heating_times(double omega0, int k_max);

// Independent check on heating_added: integrates the driven oscillator
//   q'' = -w0^2 q - x_trap''(t),  q(0) = q'(0) = 0,
// with a fixed-step classical RK4 scheme and returns the final classical
// energy in units of hbar w0. For this trajectory the ratio to
// heating_added is the constant 1/2 (pinned by test).
HeatingResult simulate_transport_oracle(const TransportSpec& spec, long steps);

// max_t |dw/dt| / w^2 over a sampled trap-frequency curve (finite
// differences); the caller compares the result against its adiabaticity
// threshold, conventionally 0.01.
double parametric_adiabaticity(std::span<const double> omega_samples,
                               double dt);

// floor(coherence_time / per_shift_time): whole shift operations that fit
// into the coherence time.
long shift_budget(double coherence_time_s, double per_shift_time_s);

}  // namespace microtrap::transport
