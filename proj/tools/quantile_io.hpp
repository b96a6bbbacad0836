#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tailvar/linalg.hpp"

namespace tailvar::cli {

// Per-step quantile forecasts as exchanged between predict, backtest and
// report: column t is the 0-based position in the source return series, the
// remaining columns are named q_<tau>.
struct QuantileTable {
  std::vector<std::size_t> t;
  Vec taus;
  Matrix q;  // rows align with t, columns with taus
};

void write_quantile_csv(const std::string& path,
                        const std::vector<std::size_t>& t, const Vec& taus,
                        const Matrix& q);

QuantileTable read_quantile_csv(const std::string& path);

}  // namespace tailvar::cli
