#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tailvar/linalg.hpp"
#include "tailvar/train.hpp"

namespace tailvar {

// 95% rejection thresholds for the likelihood-ratio statistics (chi-square
// with 1 and 2 degrees of freedom).
constexpr double kLrThreshold1df = 3.8415;
constexpr double kLrThreshold2df = 5.9915;

// I_t = 1 iff r_t < q_t (strict: r_t = q_t is no violation).
std::vector<int> hit_sequence(std::span<const double> returns,
                              std::span<const double> forecasts);

// Unconditional coverage statistic
//   LR_uc = -2 ln[ (1-tau)^{n0} tau^{n1} / ((1-pi)^{n0} pi^{n1}) ],
// pi = n1/n, under the convention 0 ln 0 = 0.  Degenerate ratios produce
// +infinity.  Zero exactly when n1/n = tau.
double kupiec_uc(std::span<const int> hits, double tau);

// Independence statistic over the first-order transition counts, which start
// at the second observation.  Same conventions as kupiec_uc.
double christoffersen_ind(std::span<const int> hits);

// LR_cc = LR_uc + LR_ind (two degrees of freedom); infinity propagates.
double conditional_coverage(std::span<const int> hits, double tau);

struct BacktestReport {
  double tau = 0.0;
  std::size_t n = 0;
  std::size_t violations = 0;        // n1
  std::size_t ideal_violations = 0;  // round(tau * n)
  std::size_t n00 = 0, n01 = 0, n10 = 0, n11 = 0;
  double lr_uc = 0.0;
  double lr_ind = 0.0;
  double lr_cc = 0.0;
  bool reject_uc = false;
  bool reject_ind = false;
  bool reject_cc = false;
};

// Full coverage report of one forecast column at one level.
BacktestReport backtest_level(std::span<const double> returns,
                              std::span<const double> forecasts, double tau);

// Mean pinball loss (1/|subset|)(1/n) over the subset's columns of the
// quantile matrix.  Every subset level must appear in `taus` (within 1e-12);
// rows of `quantiles` align with `returns`, columns with `taus`.
double pinball_table(std::span<const double> returns, const Matrix& quantiles,
                     const TauGrid& taus, std::span<const double> subset);

// CSV: tau,n,violations,ideal_violations,lr_uc,lr_ind,lr_cc,reject_uc,
// reject_ind,reject_cc.  Infinite statistics are written as "Inf".
void write_backtest_csv(const std::string& path,
                        const std::vector<BacktestReport>& reports);

// Human-readable table with "violations/ideal" annotations and a star on
// statistics exceeding their 95% threshold.
void write_backtest_text(const std::string& path,
                         const std::vector<BacktestReport>& reports);

}  // namespace tailvar
