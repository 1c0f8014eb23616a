#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "microtrap/optics.hpp"
#include "microtrap/register_control.hpp"
#include "microtrap/supply_pipeline.hpp"

// Scenario files: one JSON document describing register arrays, transport
// sweeps, depth masks, split experiments, and an optional supply-pipeline
// run. Field names carry their unit (pitch_um, depth_mK, ...) and parsing
// is strict: unknown keys are errors. Structs mirror the file values
// verbatim so parse -> serialize -> parse is the identity.

namespace microtrap::scenario {

struct ArrayConfig {
  std::string name;
  double pitch_um = 0.0;
  double lens_diameter_um = 0.0;
  double numerical_aperture = 0.0;
  int rows = 0;
  int cols = 0;
  double demagnification = 1.0;
  std::string na_convention = "half_pitch_over_f";
  double wavelength_nm = 0.0;
  double waist_um = 0.0;
  double depth_mK = 0.0;
  double peak_mean_atoms = 10.0;
  double beam_radius_pitches = 2.5;

  bool operator==(const ArrayConfig&) const = default;

  optics::LensArraySpec lens_spec() const;
  optics::NaConvention convention() const;
  optics::TrapParams trap_params() const;
  // Depth pattern = nominal depth everywhere, Gaussian beam envelope,
  // uniform loading weight, no atoms yet.
  register_control::RegisterState base_register() const;
};

struct TransportSweepConfig {
  std::string name;
  std::string array_name;
  double distance_um = 0.0;  // 0 = one site spacing of the array
  double tmin_us = 0.0;
  double tmax_us = 0.0;
  int points = 0;

  bool operator==(const TransportSweepConfig&) const = default;
};

struct MaskConfig {
  std::string name;
  std::string array_name;
  std::string file;  // CSV grid of 0..255, relative to the scenario file

  bool operator==(const MaskConfig&) const = default;
};

struct SplitConfig {
  std::string name;
  std::string array_name;
  std::vector<int> sites;  // flat row-major indices
  std::string model = "boltzmann";
  double temperature_eff_uK = 25.0;
  double exponent_gamma = 1.5;
  double hold_depth_scale = 1.0;   // holding depth / nominal depth
  double move_depth_scale = 1.0;   // moving depth / nominal depth
  double transfer_efficiency = 1.0;
  double transfer_duration_ms = 0.0;  // > 0 = cross-ramp stage before the split

  bool operator==(const SplitConfig&) const = default;

  register_control::SplitModel split_model() const;
};

struct PipelineSection {
  double lambda = 2.0;
  double collision_ms = 30.0;
  double retention = 0.57;
  double exposure_ms = 199.0;
  double overhead_ms = 0.0;
  double bg_rate_mean = 1500.0;
  double bg_rate_sigma = 820.0;
  double atom_rate_mean = 6344.0;
  double atom_rate_sigma = 1200.0;
  double threshold = 4833.0;
  double bin_width = 0.0;  // 0 = range/60
  long trials = 900;

  bool operator==(const PipelineSection&) const = default;

  supply::PipelineConfig to_config(std::uint64_t seed) const;
};

struct Scenario {
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  std::vector<ArrayConfig> arrays;
  std::vector<TransportSweepConfig> transports;
  std::vector<MaskConfig> masks;
  std::vector<SplitConfig> splits;
  std::optional<PipelineSection> pipeline;

  bool operator==(const Scenario&) const = default;

  // ConfigError when the name is unknown.
  const ArrayConfig& array_by_name(const std::string& name) const;
  // Cross-field checks: at least one action, references resolve, ranges ok.
  void validate() const;
};

// Throws ConfigError on malformed JSON, unknown keys, wrong types, or
// failed validation.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::filesystem::path& file);
std::string serialize_scenario(const Scenario& s);

// CSV grid of integers in [0,255]; shape must match (rows, cols).
register_control::SlmMask load_mask_csv(const std::filesystem::path& file,
                                        int rows, int cols);

// The two register generations used by `repro` and `sweep-transport`:
// "register30" (30 um spacing) and "register55" (55 um spacing).
const std::vector<ArrayConfig>& builtin_arrays();
const ArrayConfig& builtin_array(const std::string& name);

}  // namespace microtrap::scenario
