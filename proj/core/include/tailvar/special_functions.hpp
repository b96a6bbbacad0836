#pragma once

#include "tailvar/prng.hpp"

namespace tailvar {

// Standard normal density.
double std_normal_pdf(double x);

// Standard normal CDF, accurate over the full double range.
double std_normal_cdf(double x);

// Inverse of the standard normal CDF.  Throws std::domain_error unless
// 0 < tau < 1.  Absolute error is far below 1e-9 across the domain, and the
// result for 1 - tau is the exact negation whenever 1 - tau is itself exactly
// representable (all dyadic levels, e.g. 0.0625 / 0.9375).
double std_normal_quantile(double tau);

// Density of Student's t with nu > 0 degrees of freedom (unscaled form).
double student_t_pdf(double x, double nu);

// CDF of Student's t via the regularized incomplete beta function.
// Throws std::domain_error for nu <= 0.
double student_t_cdf(double x, double nu);

// Inverse CDF of Student's t.  Throws std::domain_error unless 0 < tau < 1
// and nu > 0.  Satisfies |student_t_cdf(result, nu) - tau| <= 1e-9.
double student_t_quantile(double tau, double nu);

// Draws one variate from Student's t by inverse-CDF transform of an open
// (0,1) uniform, so sampling is exactly reproducible from the Prng stream.
double sample_student_t(Prng& rng, double nu);

// Regularized incomplete beta function I_x(a, b) for a, b > 0, 0 <= x <= 1.
// Evaluated with the Lentz continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

}  // namespace tailvar
