#pragma once

#include <cstdint>
#include <random>
#include <vector>

// Monte Carlo model of the single-atom supply cycle: Poisson extraction
// from a reservoir site, pair-loss filtering down to {0,1} atoms,
// fluorescence count-rate detection, two-Gaussian histogram fitting, and
// threshold classification into delivery statistics.

namespace microtrap::supply {

struct PipelineConfig {
  double poisson_mean_lambda = 2.0;    // reservoir atoms per extraction
  double collision_duration_s = 0.030; // pair-loss window
  double single_atom_retention = 0.57; // survival of the remaining atom
  double exposure_time_s = 0.199;      // detection integration window
  double extra_overhead_s = 0.0;       // everything else in one cycle
  double bg_rate_mean = 1500.0;        // counts/s, empty trap
  double bg_rate_sigma = 820.0;
  double atom_rate_mean = 6344.0;      // counts/s, one atom
  double atom_rate_sigma = 1200.0;
  double threshold = 4833.0;           // counts/s, "1 atom" above this
  double bin_width = 0.0;              // histogram bin; 0 = range/60
  long trials = 900;
  std::uint64_t rng_seed = 0x5eed0001u;

  void validate() const;
  double cycle_time_s() const {
    return collision_duration_s + exposure_time_s + extra_overhead_s;
  }
};

struct TrialOutcome {
  int initial_atoms = 0;
  int final_atoms = 0;    // in {0,1}
  double count_rate = 0.0;
  int classified_as = 0;  // 1 iff count_rate > threshold
};

// Fixed-width histogram. counts[i] covers
// [origin + i*bin_width, origin + (i+1)*bin_width).
struct Histogram {
  double origin = 0.0;
  double bin_width = 0.0;
  std::vector<double> counts;

  double center(std::size_t i) const {
    return origin + (static_cast<double>(i) + 0.5) * bin_width;
  }
  double total() const;
};

// Two-Gaussian mixture; class 0 is the leftmost mode (empty trap).
struct HistogramFit {
  double weight_0 = 0.0, mean_0 = 0.0, sigma_0 = 0.0;
  double weight_1 = 0.0, mean_1 = 0.0, sigma_1 = 0.0;
  // Set when the histogram lacks two separated modes (valley at least
  // 20 % below both peaks); weights are then (1, 0) from plain moments.
  bool degenerate = false;
};

struct SupplyStats {
  double p_zero = 0.0;
  double p_one = 0.0;
  double false_positive_rate = 0.0;   // share of above-threshold mass that is background
  double delivery_probability = 0.0;  // total mass above threshold
  double delivery_fidelity = 0.0;     // 1 - false_positive_rate
  double repetition_rate = 0.0;       // 1 / cycle_time, filled by run_pipeline
};

struct PipelineResult {
  std::vector<TrialOutcome> outcomes;
  Histogram histogram;
  HistogramFit fit;
  SupplyStats stats;
};

// Poisson(lambda) atom count drawn from the reservoir.
int extract_sample(double lambda, std::mt19937_64& rng);

// Pair loss keeps n mod 2; a surviving single atom is then retained with
// probability `retention`. Never returns anything above 1.
int collisional_blockade(int n, double retention, std::mt19937_64& rng);

// Closed-form P(final = 1) = retention * (1 - exp(-2 lambda)) / 2, the
// Poisson odd-parity probability times the retention factor.
double p_single_analytic(double lambda, double retention);

// Count rate for a filtered trap: background Gaussian for 0 atoms, the
// single-atom Gaussian for 1.
double detect(int final_atoms, const PipelineConfig& config,
              std::mt19937_64& rng);

// Fixed-width binning from min(rates); bin mass equals the sample count.
Histogram build_histogram(const std::vector<double>& rates, double bin_width);

// Levenberg-Marquardt least squares of a two-Gaussian mixture against bin
// centers/counts, initialized from the two highest separated modes.
// Weights are the normalized areas and sum to 1. Throws FitError with the
// last residual when the iteration fails to converge.
HistogramFit fit_two_gaussians(const Histogram& hist);

// Threshold statistics from a fitted mixture. Requires
// mean_0 < threshold < mean_1 and a non-degenerate fit. repetition_rate
// is left 0 here.
SupplyStats classify_and_score(const HistogramFit& fit, double threshold);

// Full cycle, `trials` times. Per-trial RNG streams are derived from
// rng_seed and the trial index, so results are independent of execution
// order and bit-identical across runs.
PipelineResult run_pipeline(const PipelineConfig& config);

}  // namespace microtrap::supply
