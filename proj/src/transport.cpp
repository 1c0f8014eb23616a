#include "microtrap/transport.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "microtrap/constants.hpp"
#include "microtrap/errors.hpp"

namespace microtrap::transport {

using constants::hbar;
using constants::pi;

namespace {

// Envelope is restricted to w0 T above this multiple of pi.
constexpr double kAdiabaticCutoff = pi * (1.0 + 1e-6);

// Direct evaluation switches to the series limit this close to w0 T = pi.
constexpr double kSingularityWindow = 1e-7;

HeatingResult make_result(double quanta, double omega0, bool envelope) {
  return {quanta, quanta * hbar * omega0, envelope};
}

}  // namespace

void TransportSpec::validate() const {
  if (!(distance_m >= 0.0))
    throw std::domain_error("transport: distance must be >= 0");
  if (!(duration_s > 0.0))
    throw std::domain_error("transport: duration must be > 0");
  if (!(omega0 > 0.0))
    throw std::domain_error("transport: omega0 must be > 0");
  if (!(atom_mass_kg > 0.0))
    throw std::domain_error("transport: atom mass must be > 0");
}

HeatingResult heating_added(const TransportSpec& spec) {
  spec.validate();
  double u = spec.omega0 * spec.duration_s;
  double scale =
      spec.atom_mass_kg * spec.distance_m * spec.distance_m * spec.omega0 / hbar;

  // Around u = pi both cos^2(u/2) and (pi^2 - u^2)^2 vanish quadratically;
  // the ratio tends to 1/(16 pi^2).
  if (std::abs(u - pi) < kSingularityWindow)
    return make_result(scale * pi * pi / 16.0, spec.omega0, false);

  double c = std::cos(0.5 * u);
  double denom = pi * pi - u * u;
  double quanta = scale * pi * pi * pi * pi * c * c / (denom * denom);
  return make_result(quanta, spec.omega0, false);
}

HeatingResult heating_envelope(const TransportSpec& spec) {
  spec.validate();
  double u = spec.omega0 * spec.duration_s;
  if (u <= kAdiabaticCutoff)
    throw NotAdiabaticError(
        "heating_envelope: omega0*T = " + std::to_string(u) +
        " is at or below the adiabatic branch (requires omega0*T > pi)");
  double scale =
      spec.atom_mass_kg * spec.distance_m * spec.distance_m * spec.omega0 / hbar;
  double denom = u * u - pi * pi;
  double quanta = scale * pi * pi * pi * pi / (denom * denom);
  return make_result(quanta, spec.omega0, true);
}

double min_transport_time(double distance_m, double omega0,
                          double atom_mass_kg, double n_max) {
  if (!(n_max > 0.0))
    throw std::domain_error("min_transport_time: n_max must be > 0");
  if (!(distance_m > 0.0))
    throw std::domain_error("min_transport_time: distance must be > 0");
  if (!(omega0 > 0.0) || !(atom_mass_kg > 0.0))
    throw std::domain_error("min_transport_time: omega0 and mass must be > 0");

  auto envelope = [&](double t) {
    TransportSpec s{distance_m, t, omega0, atom_mass_kg};
    return heating_envelope(s).quanta;
  };

  double lo = 1.01 * pi / omega0;
  double hi = 1e6 / omega0;
  double f_lo = envelope(lo);
  double f_hi = envelope(hi);
  if (!(f_lo >= n_max) || !(f_hi <= n_max)) {
    throw NumericError(
        "min_transport_time: no bracket; envelope(" + std::to_string(lo) +
        " s) = " + std::to_string(f_lo) + ", envelope(" + std::to_string(hi) +
        " s) = " + std::to_string(f_hi) + ", n_max = " + std::to_string(n_max));
  }

  // Envelope is strictly decreasing on the branch, so bisection is safe.
  while ((hi - lo) > 1e-6 * hi) {
    double mid = 0.5 * (lo + hi);
    if (envelope(mid) > n_max)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

std::vector<double> zero_heating_times(double omega0, int k_max) {
  if (!(omega0 > 0.0))
    throw std::domain_error("zero_heating_times: omega0 must be > 0");
  if (k_max < 1)
    throw std::domain_error("zero_heating_times: k_max must be >= 1");
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(k_max));
  for (int k = 1; k <= k_max; ++k)
    times.push_back((2.0 * k + 1.0) * pi / omega0);
  return times;
}

HeatingResult simulate_transport_oracle(const TransportSpec& spec,
                                        long steps) {
  spec.validate();
  if (steps < 10000)
    throw std::domain_error(
        "simulate_transport_oracle: need >= 1e4 steps for the quoted accuracy");

  double w2 = spec.omega0 * spec.omega0;
  double t_total = spec.duration_s;
  double a0 = 0.5 * spec.distance_m * (pi / t_total) * (pi / t_total);
  // trap acceleration for x(t) = (S/2)(1 - cos(pi t/T))
  auto accel = [&](double t, double q) {
    return -w2 * q - a0 * std::cos(pi * t / t_total);
  };

  double h = t_total / static_cast<double>(steps);
  double q = 0.0, v = 0.0;  // comoving frame, starts at rest in the trap
  for (long i = 0; i < steps; ++i) {
    double t = h * static_cast<double>(i);
    double k1q = v;
    double k1v = accel(t, q);
    double k2q = v + 0.5 * h * k1v;
    double k2v = accel(t + 0.5 * h, q + 0.5 * h * k1q);
    double k3q = v + 0.5 * h * k2v;
    double k3v = accel(t + 0.5 * h, q + 0.5 * h * k2q);
    double k4q = v + h * k3v;
    double k4v = accel(t + h, q + h * k3q);
    q += h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
    v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  }
  if (!std::isfinite(q) || !std::isfinite(v))
    throw NumericError("simulate_transport_oracle: state became non-finite");

  double energy = 0.5 * spec.atom_mass_kg * (v * v + w2 * q * q);
  return {energy / (hbar * spec.omega0), energy, false};
}

double parametric_adiabaticity(std::span<const double> omega_samples,
                               double dt) {
  if (omega_samples.size() < 2)
    throw std::domain_error("parametric_adiabaticity: need >= 2 samples");
  if (!(dt > 0.0))
    throw std::domain_error("parametric_adiabaticity: dt must be > 0");
  for (double w : omega_samples)
    if (!(w > 0.0))
      throw std::domain_error(
          "parametric_adiabaticity: omega must be > 0 at every sample");

  std::size_t n = omega_samples.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double deriv;
    if (i == 0)
      deriv = (omega_samples[1] - omega_samples[0]) / dt;
    else if (i + 1 == n)
      deriv = (omega_samples[n - 1] - omega_samples[n - 2]) / dt;
    else
      deriv = (omega_samples[i + 1] - omega_samples[i - 1]) / (2.0 * dt);
    double w = omega_samples[i];
    double ratio = std::abs(deriv) / (w * w);
    if (ratio > worst) worst = ratio;
  }
  return worst;
}

long shift_budget(double coherence_time_s, double per_shift_time_s) {
  if (!(coherence_time_s > 0.0) || !(per_shift_time_s > 0.0))
    throw std::domain_error("shift_budget: times must be > 0");
  return static_cast<long>(std::floor(coherence_time_s / per_shift_time_s));
}

}  // namespace microtrap::transport
