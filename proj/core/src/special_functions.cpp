#include "tailvar/special_functions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tailvar {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kSqrt2Pi = 2.50662827463100050242;

// Acklam's rational approximation of the normal quantile, lower half only
// (0 < p <= 0.5).  Followed by one Halley step, which pushes the absolute
// error to the order of machine precision.
double normal_quantile_lower_half(double p) {
  static constexpr double a[6] = {
      -3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {
      -5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[6] = {
      -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {
      7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }

  // Halley refinement.  Skipped in the extreme tail where exp(x^2/2) would
  // overflow; the raw approximation is already well inside 1e-9 there.
  if (x * x < 1400.0) {
    const double e = std_normal_cdf(x) - p;
    const double u = e * kSqrt2Pi * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
  }
  return x;
}

constexpr int kBetaCfMaxIter = 400;
constexpr double kBetaCfEps = 3e-16;
constexpr double kBetaCfTiny = 1e-300;

// Continued fraction for the incomplete beta function (Lentz's method).
double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kBetaCfTiny) d = kBetaCfTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kBetaCfMaxIter; ++m) {
    const int m2 = 2 * m;
    double an = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + an * d;
    if (std::abs(d) < kBetaCfTiny) d = kBetaCfTiny;
    c = 1.0 + an / c;
    if (std::abs(c) < kBetaCfTiny) c = kBetaCfTiny;
    d = 1.0 / d;
    h *= d * c;
    an = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + an * d;
    if (std::abs(d) < kBetaCfTiny) d = kBetaCfTiny;
    c = 1.0 + an / c;
    if (std::abs(c) < kBetaCfTiny) c = kBetaCfTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kBetaCfEps) break;
  }
  return h;
}

// I_x(a, b) with the complement of x passed explicitly, so callers that know
// 1-x to full precision (the t CDF does) lose nothing to cancellation.
double ibeta_with_complement(double a, double b, double x, double cx) {
  if (x <= 0.0) return 0.0;
  if (cx <= 0.0) return 1.0;
  // Use the symmetry I_x(a,b) = 1 - I_{1-x}(b,a) to stay in the region where
  // the continued fraction converges quickly.
  if (x > (a + 1.0) / (a + b + 2.0)) {
    return 1.0 - ibeta_with_complement(b, a, cx, x);
  }
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                          std::lgamma(b) + a * std::log(x) + b * std::log(cx);
  return std::exp(ln_front) * beta_continued_fraction(a, b, x) / a;
}

}  // namespace

double std_normal_pdf(double x) {
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double std_normal_quantile(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw std::domain_error("std_normal_quantile: tau must lie in (0, 1)");
  }
  if (tau == 0.5) return 0.0;
  // Reflect the upper half onto the lower one.  Besides halving the code
  // paths, this makes the results for tau and 1-tau exact negations of each
  // other whenever 1-tau is itself exactly representable.
  if (tau > 0.5) return -normal_quantile_lower_half(1.0 - tau);
  return normal_quantile_lower_half(tau);
}

double student_t_pdf(double x, double nu) {
  if (!(nu > 0.0)) {
    throw std::domain_error("student_t_pdf: nu must be positive");
  }
  const double ln_norm = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                         0.5 * std::log(nu * 3.14159265358979323846);
  return std::exp(ln_norm - 0.5 * (nu + 1.0) * std::log1p(x * x / nu));
}

double student_t_cdf(double x, double nu) {
  if (!(nu > 0.0)) {
    throw std::domain_error("student_t_cdf: nu must be positive");
  }
  if (std::isnan(x)) return x;
  if (std::isinf(x)) return x > 0.0 ? 1.0 : 0.0;
  if (x == 0.0) return 0.5;
  // I_{nu/(nu+x^2)}(nu/2, 1/2) is twice the tail probability beyond |x|.
  // Both the ratio and its complement are formed directly from nu and x^2 so
  // neither suffers cancellation.
  const double x2 = x * x;
  const double t = nu / (nu + x2);
  const double ct = x2 / (nu + x2);
  const double tail = 0.5 * ibeta_with_complement(0.5 * nu, 0.5, t, ct);
  return x > 0.0 ? 1.0 - tail : tail;
}

double student_t_quantile(double tau, double nu) {
  if (!(nu > 0.0)) {
    throw std::domain_error("student_t_quantile: nu must be positive");
  }
  if (!(tau > 0.0 && tau < 1.0)) {
    throw std::domain_error("student_t_quantile: tau must lie in (0, 1)");
  }
  if (tau == 0.5) return 0.0;
  if (tau > 0.5) return -student_t_quantile(1.0 - tau, nu);

  // Bracket the root of F(x) = tau on the negative axis, then close in with
  // bisection-safeguarded Newton steps.
  double hi = 0.0;
  double lo = -1.0;
  while (student_t_cdf(lo, nu) > tau) {
    hi = lo;
    lo *= 2.0;
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = student_t_cdf(x, nu) - tau;
    if (f > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    if (std::abs(f) <= 1e-13) break;
    const double slope = student_t_pdf(x, nu);
    double next = slope > 0.0 ? x - f / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= 1e-14 * std::max(1.0, std::abs(x))) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

double sample_student_t(Prng& rng, double nu) {
  return student_t_quantile(rng.next_open_uniform(), nu);
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::domain_error(
        "regularized_incomplete_beta: a and b must be positive");
  }
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error(
        "regularized_incomplete_beta: x must lie in [0, 1]");
  }
  return ibeta_with_complement(a, b, x, 1.0 - x);
}

}  // namespace tailvar
