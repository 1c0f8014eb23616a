#pragma once

#include <stdexcept>
#include <string>

namespace microtrap {

// Solver/integrator failure (bracket not found, non-finite state, ...).
// The message carries the diagnostic bounds or values.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Nonlinear fit did not converge; keeps the last residual for diagnostics.
class FitError : public NumericError {
 public:
  FitError(const std::string& msg, double last_residual)
      : NumericError(msg), last_residual_(last_residual) {}
  double last_residual() const { return last_residual_; }

 private:
  double last_residual_;
};

// Scenario parse or validation problem (bad field, missing reference, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested transport time sits below the adiabatic branch (omega0*T <= pi),
// where the heating envelope has its pole and is not a meaningful bound.
class NotAdiabaticError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace microtrap
