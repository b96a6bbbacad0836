#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "tailvar/linalg.hpp"
#include "tailvar/train.hpp"

namespace tailvar {

enum class Innovation { normal, student_t };

// GARCH(1,1) with constant conditional mean:
//   eps_t = r_t - mu,  sigma_t^2 = omega + alpha eps_{t-1}^2 + beta sigma_{t-1}^2.
struct GarchParams {
  double mu;
  double omega;
  double alpha;
  double beta;
  double nu;  // degrees of freedom; meaningful only for student_t
  Innovation kind;

  // Validates omega > 0, alpha >= 0, beta >= 0, alpha + beta < 1, and
  // nu > 2 for t innovations.  Throws std::invalid_argument.
  GarchParams(double mu, double omega, double alpha, double beta,
              Innovation kind = Innovation::normal, double nu = 0.0);
};

// Conditional volatilities sigma_t (not squared) under the recursion, with
// sigma_1^2 set to the sample (1/n) variance of the demeaned returns.
// Throws NumericError if that variance is not strictly positive.
Vec filter_volatility(const GarchParams& params,
                      std::span<const double> returns);

// Log density of one residual under N(0, sigma2) or under Student's t
// rescaled to variance sigma2 (requires nu > 2 for the t case).
double innovation_logpdf(double eps, double sigma2, Innovation kind,
                         double nu);

// Sum of per-step innovation log densities along the filtered recursion.
double log_likelihood(const GarchParams& params,
                      std::span<const double> returns);

struct GarchFitReport {
  GarchParams params;
  double log_likelihood = 0.0;
  bool converged = false;      // simplex tolerance met within iteration cap
  std::size_t iterations = 0;  // of the winning start
};

// Maximum likelihood via Nelder-Mead in an unconstrained reparameterization
// (log omega, logistic persistence and share, log(nu - 2)), three
// deterministic starts, best final likelihood wins.  Requires length >= 100
// (DataError); throws NumericError when the likelihood is degenerate.
// Non-convergence is reported through the flag, not an exception.
GarchFitReport fit_mle(std::span<const double> returns, Innovation kind);

// q_k^t = mu + sigma_t * Qinn(tau_k), where Qinn is the innovation quantile
// function normalized to unit variance.  One row per observation.
Matrix forecast_quantiles(const GarchParams& params,
                          std::span<const double> returns,
                          const TauGrid& taus);

// Key/value text export of fitted parameters, and its inverse.
void write_garch_params(const std::string& path, const GarchParams& params);
GarchParams read_garch_params(const std::string& path);

}  // namespace tailvar
