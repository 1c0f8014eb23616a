#pragma once

#include <cstdint>
#include <utility>
#include <vector>

// Per-site trap-depth control of a 2D register: 8-bit masking of the
// trapping light, depth-weighted ensemble loading, cross-ramp transfer
// between two superimposed registers, and depth-controlled splitting.
// All atom numbers here are ensemble means; integer atom sampling lives
// in the supply pipeline.

namespace microtrap::register_control {

// 8-bit per-site transmission pattern. 255 = full trapping power.
struct SlmMask {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> values;  // row-major, rows*cols entries

  void validate() const;
  std::size_t size() const { return values.size(); }
};

// Snapshot of one register. Vectors are row-major with rows*cols entries.
// States are value types; operations return new snapshots.
struct RegisterState {
  int rows = 0;
  int cols = 0;
  double nominal_depth_j = 0.0;        // full unmasked trap depth (J)
  std::vector<double> depths;          // per-site depth (J), >= 0
  std::vector<double> mean_atoms;      // per-site mean atom number, >= 0
  std::vector<double> beam_envelope;   // incident beam weight, in [0,1]
  std::vector<double> loading_weight;  // capture weight, in [0,1]

  void validate() const;  // sizes match, ranges hold, no atoms in off traps
  std::size_t site_count() const { return depths.size(); }
};

enum class SplitKind { boltzmann, power_law };

// How an ensemble partitions between two traps of unequal depth.
struct SplitModel {
  SplitKind kind = SplitKind::boltzmann;
  double temperature_eff_k = 0.0;  // boltzmann kind
  double exponent_gamma = 0.0;     // power_law kind

  void validate() const;
};

struct TransferSpec {
  double duration_s = 0.0;
  double efficiency = 0.0;  // in [0,1]

  void validate() const;
};

// Uniform fully-loaded register: depth = nominal everywhere, envelope and
// loading weight 1, no atoms yet.
RegisterState make_uniform_register(int rows, int cols, double depth_j);

// Centered 2D Gaussian weight over the array, 1/e^2 radius given in units
// of the site pitch. Weight is 1 at the array center.
std::vector<double> gaussian_beam_envelope(int rows, int cols,
                                           double radius_pitches);

// depth_i = base_depth_i * mask_i / 255. Mask 0 switches a site off.
std::vector<double> apply_mask(const std::vector<double>& base_depths,
                               const SlmMask& mask);

// Loads atoms into every site: mean = peak * envelope * weight * L(depth),
// with linear clamped response L(d) = min(d / nominal_depth, 1).
RegisterState load_register(const RegisterState& state,
                            double peak_mean_atoms);

// Ramps the source register down and the target up over spec.duration_s;
// efficiency * source atoms arrive in the target, the rest is lost. The
// target's depths are the ramped-up end state and must be on wherever
// atoms arrive. Returns (source after, target after).
std::pair<RegisterState, RegisterState> cross_ramp_transfer(
    const RegisterState& source, const RegisterState& target,
    const TransferSpec& spec);

// Shifted-to-unshifted atom ratio R for one site.
//   boltzmann: R = expm1(d_move / kB T_eff) / expm1(d_hold / kB T_eff)
//   power_law: R = (d_move / d_hold)^gamma
// R = 0 at d_move = 0, R = 1 at equal depths, strictly increasing in
// d_move. Both depths zero is a domain error; d_hold = 0 gives +inf.
double splitting_ratio(const SplitModel& model, double depth_hold_j,
                       double depth_move_j);

// At each selected site the moving-register ensemble splits R/(1+R) onto
// the moving register and 1/(1+R) onto the holding one; every other site
// keeps its atoms on the moving register. Selected sites must have a
// holding trap on. Total mean atom number is conserved exactly.
std::pair<RegisterState, RegisterState> split_sites(
    const RegisterState& moving, const RegisterState& holding,
    const std::vector<std::size_t>& selected_sites, const SplitModel& model);

}  // namespace microtrap::register_control
