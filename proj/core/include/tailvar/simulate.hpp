#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "tailvar/garch.hpp"
#include "tailvar/linalg.hpp"

namespace tailvar {

// Synthetic series with time-varying tail heaviness.  All four sequences are
// aligned: entry t holds r_t, sigma_t, nu_t, pi_t.
struct SimOutput {
  Vec returns;
  Vec true_sigma;
  Vec true_nu;
  Vec true_pi;

  std::size_t size() const { return returns.size(); }
};

// One step of each recursion, exposed for direct testing.
double benchmark_pi_step(double r_prev, double pi_prev);
double benchmark_sigma_step(double r_prev, double sigma_prev);
double benchmark_nu(double pi);

// Generates the benchmark series from r_0 = 0, sigma_0 = 1, pi_0 = 1:
//   pi_t    = sqrt(0.136 + 0.257 r_{t-1}^2 + 0.717 pi_{t-1}^2)
//   nu_t    = max(8 - 2 pi_t, 3)
//   sigma_t = sqrt(0.293 + 0.161 r_{t-1}^2 + 0.575 sigma_{t-1}^2)
//   r_t     = sigma_t z_t,  z_t ~ t(nu_t) via inverse-CDF sampling.
// Deterministic per seed.  Requires n >= 2.
SimOutput generate_htqf_benchmark(std::size_t n, std::uint64_t seed);

struct GarchSim {
  Vec returns;
  Vec true_sigma;
};

// GARCH(1,1) sample path with unit-variance innovations (normal, or t scaled
// by sqrt(nu/(nu-2))), started from the stationary variance
// omega / (1 - alpha - beta).
GarchSim generate_garch(std::size_t n, const GarchParams& params,
                        std::uint64_t seed);

// CSV with columns t, r, sigma_true, nu_true, pi_true.
void write_sim_csv(const SimOutput& sim, const std::string& path,
                   int digits = 9);

}  // namespace tailvar
