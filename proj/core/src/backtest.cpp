#include "tailvar/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "tailvar/errors.hpp"

namespace tailvar {

namespace {

// a * ln(b) under the likelihood-ratio convention 0 * ln 0 = 0.
double xlogy(double a, double b) { return a == 0.0 ? 0.0 : a * std::log(b); }

struct TransitionCounts {
  std::size_t n00 = 0, n01 = 0, n10 = 0, n11 = 0;
};

TransitionCounts count_transitions(std::span<const int> hits) {
  TransitionCounts c;
  for (std::size_t t = 1; t < hits.size(); ++t) {
    const bool prev = hits[t - 1] != 0;
    const bool cur = hits[t] != 0;
    if (!prev && !cur) ++c.n00;
    if (!prev && cur) ++c.n01;
    if (prev && !cur) ++c.n10;
    if (prev && cur) ++c.n11;
  }
  return c;
}

void format_stat(char* buffer, std::size_t size, double value) {
  if (std::isinf(value)) {
    std::snprintf(buffer, size, "Inf");
  } else {
    std::snprintf(buffer, size, "%.4f", value);
  }
}

}  // namespace

std::vector<int> hit_sequence(std::span<const double> returns,
                              std::span<const double> forecasts) {
  if (returns.size() != forecasts.size()) {
    throw std::invalid_argument("hit_sequence: length mismatch");
  }
  std::vector<int> hits(returns.size());
  for (std::size_t t = 0; t < returns.size(); ++t) {
    hits[t] = returns[t] < forecasts[t] ? 1 : 0;
  }
  return hits;
}

double kupiec_uc(std::span<const int> hits, double tau) {
  if (hits.empty()) throw std::invalid_argument("kupiec_uc: empty hits");
  if (!(tau > 0.0 && tau < 1.0)) {
    throw std::domain_error("kupiec_uc: tau must lie in (0, 1)");
  }
  const auto n = static_cast<double>(hits.size());
  double n1 = 0.0;
  for (int h : hits) n1 += h != 0 ? 1.0 : 0.0;
  const double n0 = n - n1;
  const double pi = n1 / n;
  const double ln_null = xlogy(n0, 1.0 - tau) + xlogy(n1, tau);
  const double ln_alt = xlogy(n0, 1.0 - pi) + xlogy(n1, pi);
  // The statistic is nonnegative by construction; rounding noise is not.
  return std::max(0.0, 2.0 * (ln_alt - ln_null));
}

double christoffersen_ind(std::span<const int> hits) {
  if (hits.size() < 2) {
    throw std::invalid_argument("christoffersen_ind: need >= 2 observations");
  }
  const TransitionCounts c = count_transitions(hits);
  const auto n00 = static_cast<double>(c.n00);
  const auto n01 = static_cast<double>(c.n01);
  const auto n10 = static_cast<double>(c.n10);
  const auto n11 = static_cast<double>(c.n11);
  const double total = n00 + n01 + n10 + n11;

  const double pi01 = n00 + n01 > 0.0 ? n01 / (n00 + n01) : 0.0;
  const double pi11 = n10 + n11 > 0.0 ? n11 / (n10 + n11) : 0.0;
  const double pi2 = (n01 + n11) / total;

  const double ln_null = xlogy(n00 + n10, 1.0 - pi2) + xlogy(n01 + n11, pi2);
  const double ln_alt = xlogy(n00, 1.0 - pi01) + xlogy(n01, pi01) +
                        xlogy(n10, 1.0 - pi11) + xlogy(n11, pi11);
  return std::max(0.0, 2.0 * (ln_alt - ln_null));
}

double conditional_coverage(std::span<const int> hits, double tau) {
  return kupiec_uc(hits, tau) + christoffersen_ind(hits);
}

BacktestReport backtest_level(std::span<const double> returns,
                              std::span<const double> forecasts, double tau) {
  const std::vector<int> hits = hit_sequence(returns, forecasts);
  const TransitionCounts c = count_transitions(hits);

  BacktestReport report;
  report.tau = tau;
  report.n = hits.size();
  for (int h : hits) report.violations += h != 0 ? 1 : 0;
  report.ideal_violations = static_cast<std::size_t>(
      std::llround(tau * static_cast<double>(hits.size())));
  report.n00 = c.n00;
  report.n01 = c.n01;
  report.n10 = c.n10;
  report.n11 = c.n11;
  report.lr_uc = kupiec_uc(hits, tau);
  report.lr_ind = christoffersen_ind(hits);
  report.lr_cc = report.lr_uc + report.lr_ind;
  report.reject_uc = report.lr_uc > kLrThreshold1df;
  report.reject_ind = report.lr_ind > kLrThreshold1df;
  report.reject_cc = report.lr_cc > kLrThreshold2df;
  return report;
}

double pinball_table(std::span<const double> returns, const Matrix& quantiles,
                     const TauGrid& taus, std::span<const double> subset) {
  if (quantiles.rows() != returns.size() ||
      quantiles.cols() != taus.size()) {
    throw std::invalid_argument("pinball_table: misaligned inputs");
  }
  if (subset.empty() || returns.empty()) {
    throw std::invalid_argument("pinball_table: empty inputs");
  }
  double total = 0.0;
  for (double tau : subset) {
    std::size_t column = taus.size();
    for (std::size_t k = 0; k < taus.size(); ++k) {
      if (std::abs(taus.levels()[k] - tau) <= 1e-12) {
        column = k;
        break;
      }
    }
    if (column == taus.size()) {
      throw std::invalid_argument(
          "pinball_table: subset level missing from the tau grid");
    }
    for (std::size_t t = 0; t < returns.size(); ++t) {
      total += pinball(taus.levels()[column], returns[t], quantiles(t, column));
    }
  }
  return total / (static_cast<double>(subset.size()) *
                  static_cast<double>(returns.size()));
}

void write_backtest_csv(const std::string& path,
                        const std::vector<BacktestReport>& reports) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "tau,n,violations,ideal_violations,lr_uc,lr_ind,lr_cc,"
         "reject_uc,reject_ind,reject_cc\n";
  char buffer[64];
  for (const auto& r : reports) {
    std::snprintf(buffer, sizeof buffer, "%.9g", r.tau);
    out << buffer << ',' << r.n << ',' << r.violations << ','
        << r.ideal_violations;
    for (double stat : {r.lr_uc, r.lr_ind, r.lr_cc}) {
      if (std::isinf(stat)) {
        out << ",Inf";
      } else {
        std::snprintf(buffer, sizeof buffer, ",%.9g", stat);
        out << buffer;
      }
    }
    out << ',' << (r.reject_uc ? 1 : 0) << ',' << (r.reject_ind ? 1 : 0)
        << ',' << (r.reject_cc ? 1 : 0) << '\n';
  }
}

void write_backtest_text(const std::string& path,
                         const std::vector<BacktestReport>& reports) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "tau      violations     LR_uc          LR_ind         LR_cc\n";
  char stat[32], line[160];
  for (const auto& r : reports) {
    std::string cells[3];
    const double stats[3] = {r.lr_uc, r.lr_ind, r.lr_cc};
    const bool stars[3] = {r.reject_uc, r.reject_ind, r.reject_cc};
    for (int k = 0; k < 3; ++k) {
      format_stat(stat, sizeof stat, stats[k]);
      cells[k] = std::string(stat) + (stars[k] ? "*" : "");
    }
    std::snprintf(line, sizeof line, "%-8.3f %-14s %-14s %-14s %s\n", r.tau,
                  (std::to_string(r.violations) + "/" +
                   std::to_string(r.ideal_violations))
                      .c_str(),
                  cells[0].c_str(), cells[1].c_str(), cells[2].c_str());
    out << line;
  }
  out << "\nViolations are shown as observed/ideal. A star marks a statistic "
         "above its 95% threshold\n(3.8415 for LR_uc and LR_ind, 5.9915 for "
         "LR_cc).\n";
}

}  // namespace tailvar
