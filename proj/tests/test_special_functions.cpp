#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "tailvar/prng.hpp"
#include "tailvar/special_functions.hpp"

using namespace tailvar;

TEST_SUITE("special_functions") {

TEST_CASE("normal quantile hits reference values to 1e-9") {
  struct Case {
    double tau, z;
  };
  // Reference quantiles from a high-precision inverse-erf evaluation.
  const Case cases[] = {
      {0.975, 1.9599639845400542},  {0.99, 2.3263478740408411},
      {0.001, -3.0902323061678135}, {1e-5, -4.2648907939228246},
      {1e-7, -5.1993375821928169},  {0.05, -1.6448536269514727},
      {0.1, -1.2815515655446005},   {0.3, -0.52440051270804078},
  };
  for (const Case& c : cases) {
    CHECK(std::abs(std_normal_quantile(c.tau) - c.z) < 1e-9);
  }
}

TEST_CASE("normal quantile median is exactly zero") {
  CHECK(std_normal_quantile(0.5) == 0.0);
}

TEST_CASE("normal quantile negates exactly across dyadic complements") {
  // For dyadic tau the complement 1 - tau is exactly representable, so the
  // reflection must produce an exact sign flip.
  for (double tau : {0.0625, 0.125, 0.25, 0.3125, 0.375, 0.4375}) {
    CHECK(std_normal_quantile(1.0 - tau) == -std_normal_quantile(tau));
  }
  for (double tau : {0.3, 0.07, 0.412}) {
    CHECK(std::abs(std_normal_quantile(1.0 - tau) +
                   std_normal_quantile(tau)) < 1e-12);
  }
}

TEST_CASE("normal quantile is strictly increasing") {
  double previous = -INFINITY;
  for (int i = 1; i <= 2000; ++i) {
    const double tau = i / 2001.0;
    const double z = std_normal_quantile(tau);
    REQUIRE(z > previous);
    previous = z;
  }
}

TEST_CASE("normal quantile rejects probabilities outside the open interval") {
  CHECK_THROWS_AS(std_normal_quantile(0.0), std::domain_error);
  CHECK_THROWS_AS(std_normal_quantile(1.0), std::domain_error);
  CHECK_THROWS_AS(std_normal_quantile(-0.2), std::domain_error);
  CHECK_THROWS_AS(std_normal_quantile(1.2), std::domain_error);
}

TEST_CASE("normal cdf agrees with references and inverts the quantile") {
  CHECK(std_normal_cdf(0.0) == 0.5);
  CHECK(std::abs(std_normal_cdf(1.0) - 0.84134474606854295) < 1e-15);
  for (double tau : {0.001, 0.01, 0.2, 0.5, 0.77, 0.99, 0.9999}) {
    CHECK(std::abs(std_normal_cdf(std_normal_quantile(tau)) - tau) < 1e-12);
  }
}

TEST_CASE("t cdf closed-form and reference values") {
  CHECK(student_t_cdf(0.0, 1.0) == 0.5);
  CHECK(student_t_cdf(0.0, 7.3) == 0.5);
  // Cauchy: F(1) = 1/2 + atan(1)/pi = 3/4.
  CHECK(std::abs(student_t_cdf(1.0, 1.0) - 0.75) < 1e-14);
  // nu=2 closed form F(x) = 1/2 + x / (2 sqrt(2 + x^2)), inverted at 0.9.
  CHECK(std::abs(student_t_cdf(1.8856180831641267, 2.0) - 0.9) < 1e-13);

  struct Case {
    double x, nu, p;
  };
  const Case cases[] = {
      {-2.5, 5.0, 0.027245049671188121}, {3.7, 7.5, 0.99661415620097831},
      {0.5, 0.5, 0.62134096353528168},   {-0.3, 30.0, 0.3831230526421764},
      {10.0, 3.0, 0.99893580047079292},  {-8.0, 2.5, 0.0038283220655217233},
  };
  for (const Case& c : cases) {
    CHECK(std::abs(student_t_cdf(c.x, c.nu) - c.p) < 1e-13);
  }
}

TEST_CASE("t cdf is symmetric and monotone") {
  for (double nu : {0.7, 1.0, 3.0, 12.0}) {
    double previous = -1.0;
    for (int i = -40; i <= 40; ++i) {
      const double x = 0.25 * i;
      const double p = student_t_cdf(x, nu);
      REQUIRE(p > previous);
      REQUIRE(p >= 0.0);
      REQUIRE(p <= 1.0);
      CHECK(std::abs(student_t_cdf(-x, nu) - (1.0 - p)) < 1e-14);
      previous = p;
    }
  }
  CHECK_THROWS_AS(student_t_cdf(1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(student_t_cdf(1.0, -3.0), std::domain_error);
}

TEST_CASE("t quantile closed-form and reference values") {
  CHECK(student_t_quantile(0.5, 4.0) == 0.0);
  CHECK(std::abs(student_t_quantile(0.75, 1.0) - 1.0) < 1e-12);
  CHECK(std::abs(student_t_quantile(0.9, 2.0) - 1.8856180831641267) < 1e-12);

  struct Case {
    double tau, nu, x;
  };
  const Case cases[] = {
      {0.01, 5.0, -3.3649299989072186},
      {0.99, 8.0, 2.8964594477096223},
      {0.3, 4.5, -0.56350580393937786},
  };
  for (const Case& c : cases) {
    CHECK(std::abs(student_t_quantile(c.tau, c.nu) - c.x) < 1e-11);
  }
  CHECK_THROWS_AS(student_t_quantile(0.0, 5.0), std::domain_error);
  CHECK_THROWS_AS(student_t_quantile(1.0, 5.0), std::domain_error);
  CHECK_THROWS_AS(student_t_quantile(0.5, 0.0), std::domain_error);
}

TEST_CASE("t quantile round-trips through the cdf") {
  for (double nu : {0.8, 2.0, 5.0, 31.0}) {
    for (int i = 1; i < 100; ++i) {
      const double tau = i / 100.0;
      const double x = student_t_quantile(tau, nu);
      REQUIRE(std::abs(student_t_cdf(x, nu) - tau) < 1e-9);
    }
  }
}

TEST_CASE("t quantile is strictly increasing on a dense grid") {
  double previous = -INFINITY;
  for (int i = 1; i <= 1200; ++i) {
    const double x = student_t_quantile(i / 1201.0, 3.0);
    REQUIRE(x > previous);
    previous = x;
  }
}

TEST_CASE("t quantile approaches the normal quantile for large nu") {
  // The gap shrinks like the Cornish-Fisher correction (z^3 + z) / (4 nu);
  // at nu = 200 the residual beyond that term stays under 1e-3.
  const double nu = 200.0;
  for (int i = 1; i <= 99; ++i) {
    const double tau = i / 100.0;
    const double z = std_normal_quantile(tau);
    const double expected_gap = (z * z * z + z) / (4.0 * nu);
    CHECK(std::abs(student_t_quantile(tau, nu) - z - expected_gap) < 1e-3);
  }
}

TEST_CASE("t sampling is the inverse-cdf transform of the uniform stream") {
  Prng uniforms(42);
  const double u = uniforms.next_open_uniform();
  Prng rng(42);
  CHECK(sample_student_t(rng, 5.0) == student_t_quantile(u, 5.0));
}

TEST_CASE("t sample moments match the distribution") {
  Prng rng(2024);
  const int n = 1000000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = sample_student_t(rng, 8.0);
    sum += z;
    sum_sq += z * z;
  }
  const double mean = sum / n;
  const double variance = sum_sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(variance - 8.0 / 6.0) < 0.05);
}

TEST_CASE("regularized incomplete beta basics") {
  CHECK(regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0);
  // I_x(1,1) is the identity.
  CHECK(std::abs(regularized_incomplete_beta(1.0, 1.0, 0.37) - 0.37) < 1e-15);
  for (double x : {0.1, 0.45, 0.8}) {
    const double direct = regularized_incomplete_beta(1.7, 4.2, x);
    const double mirrored = regularized_incomplete_beta(4.2, 1.7, 1.0 - x);
    CHECK(std::abs(direct + mirrored - 1.0) < 1e-13);
  }
  CHECK_THROWS_AS(regularized_incomplete_beta(0.0, 1.0, 0.5),
                  std::domain_error);
  CHECK_THROWS_AS(regularized_incomplete_beta(1.0, 1.0, -0.1),
                  std::domain_error);
}

}  // TEST_SUITE
