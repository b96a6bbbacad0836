#pragma once

#include <array>
#include <cstddef>

namespace tailvar {

// Parameters of the heavy-tailed quantile function
//
//   Q(tau) = mu + sigma * Z * (exp(u*Z)/A + 1) * (exp(-v*Z)/A + 1),
//
// where Z is the standard normal quantile of tau.  The factors inflate the
// up-tail (u) and down-tail (v) relative to a Gaussian; u = v = 0 recovers
// mu + sigma * Z exactly.  A controls how gradually the inflation kicks in,
// and any A >= 3 makes Q strictly increasing in tau for all u, v >= 0.
struct HtqfParams {
  double mu;
  double sigma;
  double u;
  double v;
  double A;

  static constexpr double kDefaultA = 4.0;

  // Validating constructor: requires sigma > 0, u >= 0, v >= 0, A >= 3,
  // all finite.  Throws std::invalid_argument otherwise.
  HtqfParams(double mu, double sigma, double u, double v,
             double A = kDefaultA);

  // Escape hatch for optimizer internals that need to hold intermediate
  // (possibly invalid) values without paying for validation.
  static HtqfParams unchecked(double mu, double sigma, double u, double v,
                              double A = kDefaultA) noexcept;

 private:
  HtqfParams() = default;
};

// Probability levels passed to the quantile function are clamped to this
// range before the normal quantile is taken, keeping Z finite.
constexpr double kTauClampLow = 1e-7;
constexpr double kTauClampHigh = 1.0 - 1e-7;

// Q(tau) for the given parameters.  Throws std::domain_error unless
// 0 < tau < 1; inside that range tau is clamped to
// [kTauClampLow, kTauClampHigh].
double htqf_quantile(const HtqfParams& p, double tau);

// Same quantile evaluated at a precomputed standard normal quantile Z.
// Hot paths that sweep a fixed tau grid use this to avoid recomputing Z.
double htqf_quantile_at_z(const HtqfParams& p, double z);

// Gradient of Q(tau) with respect to (mu, sigma, u, v), in that order.
std::array<double, 4> htqf_gradient(const HtqfParams& p, double tau);
std::array<double, 4> htqf_gradient_at_z(const HtqfParams& p, double z);

// Checks strict monotonicity of Q on an equispaced tau grid over
// [1e-4, 1 - 1e-4] with `grid_size` points (at least 2 required).
bool htqf_is_monotone(const HtqfParams& p, std::size_t grid_size);

}  // namespace tailvar
