#include "microtrap/register_control.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "microtrap/constants.hpp"

namespace microtrap::register_control {

using constants::k_boltzmann;

namespace {

std::size_t expected_sites(int rows, int cols) {
  if (rows <= 0 || cols <= 0)
    throw std::domain_error("register: rows and cols must be positive");
  return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
}

void require_aligned(const RegisterState& a, const RegisterState& b,
                     const char* who) {
  if (a.rows != b.rows || a.cols != b.cols)
    throw std::invalid_argument(std::string(who) +
                                ": registers are not aligned (" +
                                std::to_string(a.rows) + "x" +
                                std::to_string(a.cols) + " vs " +
                                std::to_string(b.rows) + "x" +
                                std::to_string(b.cols) + ")");
}

// expm1(b)/expm1(a) for a > 0, without overflowing when both are large.
double expm1_ratio(double b, double a) {
  if (a > 500.0 && b > 500.0) return std::exp(b - a);
  return std::expm1(b) / std::expm1(a);
}

}  // namespace

void SlmMask::validate() const {
  if (values.size() != expected_sites(rows, cols))
    throw std::invalid_argument("mask: value count does not match rows*cols");
}

void RegisterState::validate() const {
  std::size_t n = expected_sites(rows, cols);
  if (depths.size() != n || mean_atoms.size() != n ||
      beam_envelope.size() != n || loading_weight.size() != n)
    throw std::invalid_argument("register: per-site vectors must have rows*cols entries");
  if (!(nominal_depth_j > 0.0))
    throw std::domain_error("register: nominal depth must be > 0");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(depths[i] >= 0.0))
      throw std::domain_error("register: depth must be >= 0 at site " +
                              std::to_string(i));
    if (!(mean_atoms[i] >= 0.0))
      throw std::domain_error("register: mean atoms must be >= 0 at site " +
                              std::to_string(i));
    if (!(beam_envelope[i] >= 0.0) || beam_envelope[i] > 1.0)
      throw std::domain_error("register: beam envelope outside [0,1] at site " +
                              std::to_string(i));
    if (!(loading_weight[i] >= 0.0) || loading_weight[i] > 1.0)
      throw std::domain_error("register: loading weight outside [0,1] at site " +
                              std::to_string(i));
    if (depths[i] == 0.0 && mean_atoms[i] > 0.0)
      throw std::domain_error("register: atoms in a switched-off trap at site " +
                              std::to_string(i));
  }
}

void SplitModel::validate() const {
  if (kind == SplitKind::boltzmann) {
    if (!(temperature_eff_k > 0.0))
      throw std::domain_error("split model: T_eff must be > 0");
  } else {
    if (!(exponent_gamma > 0.0))
      throw std::domain_error("split model: gamma must be > 0");
  }
}

void TransferSpec::validate() const {
  if (!(duration_s >= 0.0))
    throw std::domain_error("transfer: duration must be >= 0");
  if (!(efficiency >= 0.0) || efficiency > 1.0)
    throw std::domain_error("transfer: efficiency must lie in [0,1]");
}

RegisterState make_uniform_register(int rows, int cols, double depth_j) {
  std::size_t n = expected_sites(rows, cols);
  if (!(depth_j > 0.0))
    throw std::domain_error("register: depth must be > 0");
  RegisterState s;
  s.rows = rows;
  s.cols = cols;
  s.nominal_depth_j = depth_j;
  s.depths.assign(n, depth_j);
  s.mean_atoms.assign(n, 0.0);
  s.beam_envelope.assign(n, 1.0);
  s.loading_weight.assign(n, 1.0);
  return s;
}

std::vector<double> gaussian_beam_envelope(int rows, int cols,
                                           double radius_pitches) {
  std::size_t n = expected_sites(rows, cols);
  if (!(radius_pitches > 0.0))
    throw std::domain_error("beam envelope: radius must be > 0");
  double cx = 0.5 * (cols - 1);
  double cy = 0.5 * (rows - 1);
  double inv_w2 = 1.0 / (radius_pitches * radius_pitches);
  std::vector<double> env(n);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      double dx = c - cx;
      double dy = r - cy;
      env[static_cast<std::size_t>(r) * cols + c] =
          std::exp(-2.0 * (dx * dx + dy * dy) * inv_w2);
    }
  return env;
}

std::vector<double> apply_mask(const std::vector<double>& base_depths,
                               const SlmMask& mask) {
  mask.validate();
  if (base_depths.size() != mask.size())
    throw std::invalid_argument(
        "apply_mask: mask shape does not match register (" +
        std::to_string(mask.size()) + " cells vs " +
        std::to_string(base_depths.size()) + " sites)");
  std::vector<double> out(base_depths.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = base_depths[i] * static_cast<double>(mask.values[i]) / 255.0;
  return out;
}

RegisterState load_register(const RegisterState& state,
                            double peak_mean_atoms) {
  state.validate();
  if (!(peak_mean_atoms >= 0.0))
    throw std::domain_error("load_register: peak mean atoms must be >= 0");
  RegisterState out = state;
  for (std::size_t i = 0; i < out.site_count(); ++i) {
    double response = std::min(state.depths[i] / state.nominal_depth_j, 1.0);
    out.mean_atoms[i] = peak_mean_atoms * state.beam_envelope[i] *
                        state.loading_weight[i] * response;
  }
  return out;
}

std::pair<RegisterState, RegisterState> cross_ramp_transfer(
    const RegisterState& source, const RegisterState& target,
    const TransferSpec& spec) {
  source.validate();
  target.validate();
  spec.validate();
  require_aligned(source, target, "cross_ramp_transfer");

  RegisterState src_after = source;
  RegisterState dst_after = target;
  for (std::size_t i = 0; i < source.site_count(); ++i) {
    double moved = spec.efficiency * source.mean_atoms[i];
    if (moved > 0.0 && !(target.depths[i] > 0.0))
      throw std::domain_error(
          "cross_ramp_transfer: target trap is off at site " +
          std::to_string(i) + " but atoms arrive there");
    dst_after.mean_atoms[i] += moved;
    src_after.mean_atoms[i] = 0.0;
    src_after.depths[i] = 0.0;  // source power ramped to zero
  }
  return {std::move(src_after), std::move(dst_after)};
}

double splitting_ratio(const SplitModel& model, double depth_hold_j,
                       double depth_move_j) {
  model.validate();
  if (!(depth_hold_j >= 0.0) || !(depth_move_j >= 0.0))
    throw std::domain_error("splitting_ratio: depths must be >= 0");
  if (depth_hold_j == 0.0 && depth_move_j == 0.0)
    throw std::domain_error("splitting_ratio: both trap depths are zero");
  if (depth_move_j == 0.0) return 0.0;

  if (model.kind == SplitKind::boltzmann) {
    double kt = k_boltzmann * model.temperature_eff_k;
    return 1.0 / expm1_ratio(depth_hold_j / kt, depth_move_j / kt);
  }
  return std::pow(depth_move_j / depth_hold_j, model.exponent_gamma);
}

std::pair<RegisterState, RegisterState> split_sites(
    const RegisterState& moving, const RegisterState& holding,
    const std::vector<std::size_t>& selected_sites, const SplitModel& model) {
  moving.validate();
  holding.validate();
  model.validate();
  require_aligned(moving, holding, "split_sites");

  RegisterState mov_after = moving;
  RegisterState hold_after = holding;
  for (std::size_t site : selected_sites) {
    if (site >= moving.site_count())
      throw std::out_of_range("split_sites: site " + std::to_string(site) +
                              " outside a register of " +
                              std::to_string(moving.site_count()) + " sites");
    if (!(holding.depths[site] > 0.0))
      throw std::domain_error("split_sites: holding trap is off at selected site " +
                              std::to_string(site));

    double n = moving.mean_atoms[site];
    double move_fraction;
    if (model.kind == SplitKind::boltzmann) {
      double kt = k_boltzmann * model.temperature_eff_k;
      if (moving.depths[site] == 0.0) {
        move_fraction = 0.0;
      } else {
        double inv_r =
            expm1_ratio(holding.depths[site] / kt, moving.depths[site] / kt);
        move_fraction = 1.0 / (1.0 + inv_r);
      }
    } else {
      double r = splitting_ratio(model, holding.depths[site],
                                 moving.depths[site]);
      move_fraction = 1.0 / (1.0 + 1.0 / r);  // stays 0 at r=0, 1 at r=inf
    }

    double stays_moving = n * move_fraction;
    mov_after.mean_atoms[site] = stays_moving;
    hold_after.mean_atoms[site] += n - stays_moving;  // exact conservation
  }
  return {std::move(mov_after), std::move(hold_after)};
}

}  // namespace microtrap::register_control
