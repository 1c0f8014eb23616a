#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

#include "microtrap/constants.hpp"

// Deterministic sampling layer. std::mt19937_64 has a standard-mandated
// output sequence and the samplers below are hand-rolled, so a given seed
// reproduces bit-identical results on every platform. The std::*_distribution
// adapters are implementation-defined and are deliberately not used.

namespace microtrap::rng {

// splitmix64 finalizer (Vigna), used to spread seeds and counters.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Per-trial engine: seed = mix64(master ^ mix64(counter + 1)). Each trial
// owns an independent stream, so trials can run in any order (or in
// parallel) and still reproduce the same outcomes.
inline std::mt19937_64 trial_engine(std::uint64_t master_seed,
                                    std::uint64_t counter) {
  return std::mt19937_64(mix64(master_seed ^ mix64(counter + 1)));
}

// Uniform in [0, 1), 53-bit resolution.
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(std::mt19937_64& gen, double p) {
  return uniform01(gen) < p;
}

// Box-Muller, two uniforms per call; 1-u keeps the log argument in (0,1].
inline double normal(std::mt19937_64& gen, double mean, double sigma) {
  double u1 = 1.0 - uniform01(gen);
  double u2 = uniform01(gen);
  double r = std::sqrt(-2.0 * std::log(u1));
  return mean + sigma * r * std::cos(2.0 * constants::pi * u2);
}

// Knuth product method, chunked so exp(-lambda) never underflows.
inline int poisson(std::mt19937_64& gen, double lambda) {
  if (!(lambda >= 0.0)) throw std::domain_error("poisson: lambda must be >= 0");
  int count = 0;
  double remaining = lambda;
  while (remaining > 0.0) {
    double chunk = remaining < 500.0 ? remaining : 500.0;
    double limit = std::exp(-chunk);
    double prod = 1.0;
    int k = 0;
    do {
      ++k;
      prod *= uniform01(gen);
    } while (prod > limit);
    count += k - 1;
    remaining -= chunk;
  }
  return count;
}

}  // namespace microtrap::rng
