#include "tailvar/htqf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tailvar/special_functions.hpp"

namespace tailvar {

HtqfParams::HtqfParams(double mu_, double sigma_, double u_, double v_,
                       double A_) {
  const bool finite = std::isfinite(mu_) && std::isfinite(sigma_) &&
                      std::isfinite(u_) && std::isfinite(v_) &&
                      std::isfinite(A_);
  if (!finite || !(sigma_ > 0.0) || u_ < 0.0 || v_ < 0.0 || A_ < 3.0) {
    throw std::invalid_argument(
        "HtqfParams: need finite values with sigma > 0, u >= 0, v >= 0, "
        "A >= 3");
  }
  mu = mu_;
  sigma = sigma_;
  u = u_;
  v = v_;
  A = A_;
}

HtqfParams HtqfParams::unchecked(double mu_, double sigma_, double u_,
                                 double v_, double A_) noexcept {
  HtqfParams p;
  p.mu = mu_;
  p.sigma = sigma_;
  p.u = u_;
  p.v = v_;
  p.A = A_;
  return p;
}

double htqf_quantile_at_z(const HtqfParams& p, double z) {
  const double up = std::exp(p.u * z) / p.A + 1.0;
  const double down = std::exp(-p.v * z) / p.A + 1.0;
  return p.mu + p.sigma * z * up * down;
}

double htqf_quantile(const HtqfParams& p, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw std::domain_error("htqf_quantile: tau must lie in (0, 1)");
  }
  const double clamped = std::clamp(tau, kTauClampLow, kTauClampHigh);
  return htqf_quantile_at_z(p, std_normal_quantile(clamped));
}

std::array<double, 4> htqf_gradient_at_z(const HtqfParams& p, double z) {
  const double eu = std::exp(p.u * z) / p.A;
  const double ev = std::exp(-p.v * z) / p.A;
  const double up = eu + 1.0;
  const double down = ev + 1.0;
  const double z2 = z * z;
  return {
      1.0,                          // d/dmu
      z * up * down,                // d/dsigma
      p.sigma * z2 * eu * down,     // d/du
      -p.sigma * z2 * up * ev,      // d/dv
  };
}

std::array<double, 4> htqf_gradient(const HtqfParams& p, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw std::domain_error("htqf_gradient: tau must lie in (0, 1)");
  }
  const double clamped = std::clamp(tau, kTauClampLow, kTauClampHigh);
  return htqf_gradient_at_z(p, std_normal_quantile(clamped));
}

bool htqf_is_monotone(const HtqfParams& p, std::size_t grid_size) {
  if (grid_size < 2) {
    throw std::invalid_argument("htqf_is_monotone: grid needs >= 2 points");
  }
  constexpr double lo = 1e-4;
  constexpr double hi = 1.0 - 1e-4;
  const double step = (hi - lo) / static_cast<double>(grid_size - 1);
  double prev = htqf_quantile(p, lo);
  for (std::size_t i = 1; i < grid_size; ++i) {
    const double tau = lo + step * static_cast<double>(i);
    const double q = htqf_quantile(p, tau);
    if (!(q > prev)) return false;
    prev = q;
  }
  return true;
}

}  // namespace tailvar
