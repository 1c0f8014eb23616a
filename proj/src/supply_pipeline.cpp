#include "microtrap/supply_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "microtrap/constants.hpp"
#include "microtrap/errors.hpp"
#include "microtrap/rng.hpp"

namespace microtrap::supply {

namespace {

double gaussian_upper_tail(double z) {
  return 0.5 * std::erfc(z / std::sqrt(2.0));
}

// Boxcar of width 3; only used to locate modes, never for the fit itself.
std::vector<double> smooth3(const std::vector<double>& c) {
  std::size_t n = c.size();
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = c[i];
    double cnt = 1.0;
    if (i > 0) { acc += c[i - 1]; cnt += 1.0; }
    if (i + 1 < n) { acc += c[i + 1]; cnt += 1.0; }
    s[i] = acc / cnt;
  }
  return s;
}

struct ModeSearch {
  bool found = false;
  std::size_t left = 0;   // index of the leftmost of the two modes
  std::size_t right = 0;
};

// Two highest local maxima whose connecting valley dips at least 20 %
// below both peaks.
ModeSearch find_two_modes(const std::vector<double>& counts) {
  std::vector<double> s = smooth3(counts);
  std::size_t n = s.size();
  std::vector<std::size_t> maxima;
  for (std::size_t i = 0; i < n; ++i) {
    if (s[i] <= 0.0) continue;
    if (i > 0 && s[i] < s[i - 1]) continue;
    if (i + 1 < n && s[i] < s[i + 1]) continue;
    if (i > 0 && s[i] == s[i - 1]) continue;  // keep one index per plateau
    maxima.push_back(i);
  }
  std::sort(maxima.begin(), maxima.end(),
            [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });

  ModeSearch res;
  if (maxima.size() < 2) return res;
  std::size_t first = maxima[0];
  for (std::size_t k = 1; k < maxima.size(); ++k) {
    std::size_t second = maxima[k];
    auto lo = std::min(first, second);
    auto hi = std::max(first, second);
    double valley = s[lo];
    for (std::size_t i = lo; i <= hi; ++i) valley = std::min(valley, s[i]);
    if (valley <= 0.8 * std::min(s[first], s[second])) {
      res.found = true;
      res.left = lo;
      res.right = hi;
      return res;
    }
  }
  return res;
}

struct Moments {
  double mean = 0.0;
  double sigma = 0.0;
};

Moments histogram_moments(const Histogram& h) {
  double mass = 0.0, m1 = 0.0;
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    mass += h.counts[i];
    m1 += h.counts[i] * h.center(i);
  }
  Moments mo;
  mo.mean = m1 / mass;
  double m2 = 0.0;
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    double d = h.center(i) - mo.mean;
    m2 += h.counts[i] * d * d;
  }
  mo.sigma = std::sqrt(std::max(m2 / mass, 0.0));
  return mo;
}

double mixture(const Eigen::Matrix<double, 6, 1>& p, double x) {
  double e0 = std::exp(-0.5 * (x - p[1]) * (x - p[1]) / (p[2] * p[2]));
  double e1 = std::exp(-0.5 * (x - p[4]) * (x - p[4]) / (p[5] * p[5]));
  return p[0] * e0 + p[3] * e1;
}

}  // namespace

void PipelineConfig::validate() const {
  if (!(poisson_mean_lambda >= 0.0))
    throw ConfigError("pipeline: lambda must be >= 0");
  if (!(single_atom_retention >= 0.0) || single_atom_retention > 1.0)
    throw ConfigError("pipeline: retention must lie in [0,1]");
  if (!(bg_rate_sigma > 0.0) || !(atom_rate_sigma > 0.0))
    throw ConfigError("pipeline: rate sigmas must be > 0");
  if (!(atom_rate_mean > bg_rate_mean))
    throw ConfigError("pipeline: atom rate mean must exceed background mean");
  if (trials < 1) throw ConfigError("pipeline: trials must be >= 1");
  if (!(collision_duration_s >= 0.0) || !(exposure_time_s >= 0.0) ||
      !(extra_overhead_s >= 0.0))
    throw ConfigError("pipeline: durations must be >= 0");
  if (!(cycle_time_s() > 0.0))
    throw ConfigError("pipeline: cycle time must be > 0");
  if (!(bin_width >= 0.0))
    throw ConfigError("pipeline: bin width must be >= 0 (0 = automatic)");
  if (!std::isfinite(threshold))
    throw ConfigError("pipeline: threshold must be finite");
}

double Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), 0.0);
}

int extract_sample(double lambda, std::mt19937_64& rng) {
  return rng::poisson(rng, lambda);
}

int collisional_blockade(int n, double retention, std::mt19937_64& rng) {
  if (n < 0) throw std::domain_error("collisional_blockade: n must be >= 0");
  if (!(retention >= 0.0) || retention > 1.0)
    throw std::domain_error("collisional_blockade: retention must lie in [0,1]");
  if (n % 2 == 0) return 0;
  return rng::bernoulli(rng, retention) ? 1 : 0;
}

double p_single_analytic(double lambda, double retention) {
  if (!(lambda >= 0.0))
    throw std::domain_error("p_single_analytic: lambda must be >= 0");
  if (!(retention >= 0.0) || retention > 1.0)
    throw std::domain_error("p_single_analytic: retention must lie in [0,1]");
  return retention * 0.5 * -std::expm1(-2.0 * lambda);
}

double detect(int final_atoms, const PipelineConfig& config,
              std::mt19937_64& rng) {
  if (final_atoms != 0 && final_atoms != 1)
    throw std::domain_error("detect: final atom count must be 0 or 1");
  if (final_atoms == 0)
    return rng::normal(rng, config.bg_rate_mean, config.bg_rate_sigma);
  return rng::normal(rng, config.atom_rate_mean, config.atom_rate_sigma);
}

Histogram build_histogram(const std::vector<double>& rates, double bin_width) {
  if (rates.empty())
    throw std::domain_error("build_histogram: no samples");
  if (!(bin_width > 0.0))
    throw std::domain_error("build_histogram: bin width must be > 0");
  auto [lo_it, hi_it] = std::minmax_element(rates.begin(), rates.end());
  Histogram h;
  h.origin = *lo_it;
  h.bin_width = bin_width;
  std::size_t n_bins =
      static_cast<std::size_t>(std::floor((*hi_it - *lo_it) / bin_width)) + 1;
  h.counts.assign(n_bins, 0.0);
  for (double x : rates) {
    auto idx = static_cast<std::size_t>((x - h.origin) / bin_width);
    if (idx >= n_bins) idx = n_bins - 1;
    h.counts[idx] += 1.0;
  }
  return h;
}

HistogramFit fit_two_gaussians(const Histogram& hist) {
  std::size_t n = hist.counts.size();
  if (n < 4 || !(hist.total() > 0.0))
    throw std::domain_error("fit_two_gaussians: need >= 4 bins with mass");

  ModeSearch modes = find_two_modes(hist.counts);
  if (!modes.found) {
    Moments mo = histogram_moments(hist);
    HistogramFit flat;
    flat.degenerate = true;
    flat.weight_0 = 1.0;
    flat.mean_0 = mo.mean;
    flat.sigma_0 = std::max(mo.sigma, hist.bin_width);
    flat.weight_1 = 0.0;
    flat.mean_1 = flat.mean_0 + std::max(mo.sigma, hist.bin_width);
    flat.sigma_1 = flat.sigma_0;
    return flat;
  }

  using Vec6 = Eigen::Matrix<double, 6, 1>;
  Vec6 p;
  double sep = hist.center(modes.right) - hist.center(modes.left);
  double sigma_init = std::max(hist.bin_width, 0.25 * sep);
  p << std::max(hist.counts[modes.left], 1.0), hist.center(modes.left),
      sigma_init, std::max(hist.counts[modes.right], 1.0),
      hist.center(modes.right), sigma_init;

  double sigma_floor = 1e-3 * hist.bin_width;
  auto ssr = [&](const Vec6& q) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double r = hist.counts[i] - mixture(q, hist.center(i));
      acc += r * r;
    }
    return acc;
  };

  double lambda_lm = 1e-3;
  double current = ssr(p);
  bool converged = false;
  for (int iter = 0; iter < 200 && !converged; ++iter) {
    Eigen::MatrixXd jac(n, 6);
    Eigen::VectorXd resid(n);
    for (std::size_t i = 0; i < n; ++i) {
      double x = hist.center(i);
      double d0 = x - p[1], d1 = x - p[4];
      double e0 = std::exp(-0.5 * d0 * d0 / (p[2] * p[2]));
      double e1 = std::exp(-0.5 * d1 * d1 / (p[5] * p[5]));
      resid(static_cast<Eigen::Index>(i)) =
          hist.counts[i] - (p[0] * e0 + p[3] * e1);
      jac(static_cast<Eigen::Index>(i), 0) = e0;
      jac(static_cast<Eigen::Index>(i), 1) = p[0] * e0 * d0 / (p[2] * p[2]);
      jac(static_cast<Eigen::Index>(i), 2) =
          p[0] * e0 * d0 * d0 / (p[2] * p[2] * p[2]);
      jac(static_cast<Eigen::Index>(i), 3) = e1;
      jac(static_cast<Eigen::Index>(i), 4) = p[3] * e1 * d1 / (p[5] * p[5]);
      jac(static_cast<Eigen::Index>(i), 5) =
          p[3] * e1 * d1 * d1 / (p[5] * p[5] * p[5]);
    }
    Eigen::Matrix<double, 6, 6> jtj = jac.transpose() * jac;
    Vec6 jtr = jac.transpose() * resid;

    bool stepped = false;
    for (int attempt = 0; attempt < 25 && !stepped; ++attempt) {
      Eigen::Matrix<double, 6, 6> lhs = jtj;
      for (int k = 0; k < 6; ++k)
        lhs(k, k) += lambda_lm * std::max(jtj(k, k), 1e-12);
      Vec6 delta = lhs.ldlt().solve(jtr);
      Vec6 cand = p + delta;
      cand[0] = std::max(cand[0], 0.0);
      cand[3] = std::max(cand[3], 0.0);
      cand[2] = std::max(std::abs(cand[2]), sigma_floor);
      cand[5] = std::max(std::abs(cand[5]), sigma_floor);
      double trial = ssr(cand);
      if (trial < current) {
        if (current - trial <= 1e-12 * (current + 1e-300)) converged = true;
        p = cand;
        current = trial;
        lambda_lm = std::max(lambda_lm * 0.5, 1e-12);
        stepped = true;
      } else {
        lambda_lm *= 4.0;
      }
    }
    if (!stepped) converged = true;  // damping exhausted, at a local minimum
  }
  if (!converged)
    throw FitError("fit_two_gaussians: no convergence after 200 iterations",
                   std::sqrt(current));

  double area0 = p[0] * p[2] * std::sqrt(2.0 * constants::pi);
  double area1 = p[3] * p[5] * std::sqrt(2.0 * constants::pi);
  double total_area = area0 + area1;
  if (!(total_area > 0.0))
    throw FitError("fit_two_gaussians: fit collapsed to zero area",
                   std::sqrt(current));

  HistogramFit fit;
  fit.weight_0 = area0 / total_area;
  fit.mean_0 = p[1];
  fit.sigma_0 = p[2];
  fit.weight_1 = area1 / total_area;
  fit.mean_1 = p[4];
  fit.sigma_1 = p[5];
  if (fit.mean_0 > fit.mean_1) {
    std::swap(fit.weight_0, fit.weight_1);
    std::swap(fit.mean_0, fit.mean_1);
    std::swap(fit.sigma_0, fit.sigma_1);
  }
  return fit;
}

SupplyStats classify_and_score(const HistogramFit& fit, double threshold) {
  if (fit.degenerate)
    throw std::domain_error("classify_and_score: fit is degenerate");
  if (!(fit.sigma_0 > 0.0) || !(fit.sigma_1 > 0.0))
    throw std::domain_error("classify_and_score: fitted sigmas must be > 0");
  if (!(fit.mean_0 < threshold && threshold < fit.mean_1))
    throw std::domain_error(
        "classify_and_score: threshold " + std::to_string(threshold) +
        " must lie between the fitted means " + std::to_string(fit.mean_0) +
        " and " + std::to_string(fit.mean_1));

  double above_0 =
      fit.weight_0 * gaussian_upper_tail((threshold - fit.mean_0) / fit.sigma_0);
  double above_1 =
      fit.weight_1 * gaussian_upper_tail((threshold - fit.mean_1) / fit.sigma_1);
  double above = above_0 + above_1;

  SupplyStats st;
  st.p_zero = fit.weight_0;
  st.p_one = fit.weight_1;
  st.delivery_probability = above;
  st.false_positive_rate = above > 0.0 ? above_0 / above : 0.0;
  st.delivery_fidelity = 1.0 - st.false_positive_rate;
  return st;
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  config.validate();

  PipelineResult res;
  res.outcomes.reserve(static_cast<std::size_t>(config.trials));
  std::vector<double> rates;
  rates.reserve(static_cast<std::size_t>(config.trials));
  for (long t = 0; t < config.trials; ++t) {
    auto eng = rng::trial_engine(config.rng_seed, static_cast<std::uint64_t>(t));
    TrialOutcome o;
    o.initial_atoms = extract_sample(config.poisson_mean_lambda, eng);
    o.final_atoms =
        collisional_blockade(o.initial_atoms, config.single_atom_retention, eng);
    o.count_rate = detect(o.final_atoms, config, eng);
    o.classified_as = o.count_rate > config.threshold ? 1 : 0;
    rates.push_back(o.count_rate);
    res.outcomes.push_back(o);
  }

  double width = config.bin_width;
  if (width <= 0.0) {
    auto [lo, hi] = std::minmax_element(rates.begin(), rates.end());
    width = (*hi - *lo) / 60.0;
    if (!(width > 0.0)) width = 1.0;  // all samples identical
  }
  res.histogram = build_histogram(rates, width);
  res.fit = fit_two_gaussians(res.histogram);
  res.stats = classify_and_score(res.fit, config.threshold);
  res.stats.repetition_rate = 1.0 / config.cycle_time_s();
  return res;
}

}  // namespace microtrap::supply
