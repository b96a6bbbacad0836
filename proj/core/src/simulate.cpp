#include "tailvar/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "tailvar/errors.hpp"
#include "tailvar/prng.hpp"
#include "tailvar/special_functions.hpp"

namespace tailvar {

double benchmark_pi_step(double r_prev, double pi_prev) {
  return std::sqrt(0.136 + 0.257 * r_prev * r_prev +
                   0.717 * pi_prev * pi_prev);
}

double benchmark_sigma_step(double r_prev, double sigma_prev) {
  return std::sqrt(0.293 + 0.161 * r_prev * r_prev +
                   0.575 * sigma_prev * sigma_prev);
}

double benchmark_nu(double pi) { return std::max(8.0 - 2.0 * pi, 3.0); }

SimOutput generate_htqf_benchmark(std::size_t n, std::uint64_t seed) {
  if (n < 2) {
    throw std::invalid_argument("generate_htqf_benchmark: n must be >= 2");
  }
  Prng rng(seed);
  SimOutput out;
  out.returns.reserve(n);
  out.true_sigma.reserve(n);
  out.true_nu.reserve(n);
  out.true_pi.reserve(n);

  double r_prev = 0.0;
  double sigma_prev = 1.0;
  double pi_prev = 1.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double pi = benchmark_pi_step(r_prev, pi_prev);
    const double nu = benchmark_nu(pi);
    const double sigma = benchmark_sigma_step(r_prev, sigma_prev);
    const double z = sample_student_t(rng, nu);
    const double r = sigma * z;
    out.returns.push_back(r);
    out.true_sigma.push_back(sigma);
    out.true_nu.push_back(nu);
    out.true_pi.push_back(pi);
    r_prev = r;
    sigma_prev = sigma;
    pi_prev = pi;
  }
  return out;
}

GarchSim generate_garch(std::size_t n, const GarchParams& params,
                        std::uint64_t seed) {
  if (n < 1) {
    throw std::invalid_argument("generate_garch: n must be >= 1");
  }
  Prng rng(seed);
  GarchSim out;
  out.returns.reserve(n);
  out.true_sigma.reserve(n);

  const double t_scale =
      params.kind == Innovation::student_t
          ? std::sqrt(params.nu / (params.nu - 2.0))
          : 1.0;
  auto draw_z = [&]() {
    if (params.kind == Innovation::normal) {
      return std_normal_quantile(rng.next_open_uniform());
    }
    return sample_student_t(rng, params.nu) / t_scale;
  };

  double var = params.omega / (1.0 - params.alpha - params.beta);
  double eps_prev = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0) {
      var = params.omega + params.alpha * eps_prev * eps_prev +
            params.beta * var;
    }
    const double sigma = std::sqrt(var);
    const double eps = sigma * draw_z();
    out.returns.push_back(params.mu + eps);
    out.true_sigma.push_back(sigma);
    eps_prev = eps;
  }
  return out;
}

void write_sim_csv(const SimOutput& sim, const std::string& path,
                   int digits) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "t,r,sigma_true,nu_true,pi_true\n";
  char buffer[64];
  for (std::size_t t = 0; t < sim.size(); ++t) {
    out << t;
    const double row[4] = {sim.returns[t], sim.true_sigma[t], sim.true_nu[t],
                           sim.true_pi[t]};
    for (double value : row) {
      std::snprintf(buffer, sizeof buffer, ",%.*g", digits, value);
      out << buffer;
    }
    out << '\n';
  }
  if (!out) throw DataError("failed while writing '" + path + "'");
}

}  // namespace tailvar
