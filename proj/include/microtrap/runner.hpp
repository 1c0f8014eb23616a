#pragma once

#include <filesystem>

#include "microtrap/scenario.hpp"

// Executes scenarios: runs every configured action and writes the CSV and
// JSON outputs plus an events log into the scenario's output directory.
// All output is deterministic for a fixed scenario and seed.

namespace microtrap::runner {

// Mask file paths resolve against base_dir (the scenario file's
// directory). output_dir_override, when non-empty, replaces the
// scenario's own output_dir. Throws ConfigError for configuration
// problems and NumericError / domain errors for failed computations.
void run_scenario(const scenario::Scenario& s,
                  const std::filesystem::path& base_dir,
                  const std::filesystem::path& output_dir_override = {});

// Heating sweep for one transport distance: writes columns
// T_s, quanta_added, quanta_envelope, quanta_oracle. The envelope column
// is "nan" at or below the adiabatic branch edge.
void write_transport_sweep(const std::filesystem::path& csv_path,
                           double distance_m, double omega0,
                           double atom_mass_kg, double tmin_s, double tmax_s,
                           int points);

}  // namespace microtrap::runner
