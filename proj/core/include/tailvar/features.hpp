#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tailvar/linalg.hpp"

namespace tailvar {

// One training example for the sequence model: L rows of
// [r, (r - rbar)^2, (r - rbar)^3, (r - rbar)^4], oldest lag first, where rbar
// is the mean of the L window returns, plus the next return as target.
struct FeatureWindow {
  Matrix features;      // L x 4
  double rbar = 0.0;    // mean of the window returns
  double target = 0.0;  // the return immediately after the window
  std::size_t t_index = 0;  // 0-based position of the target in the segment
};

// Builds one window per target index t in [L, segment length).  Requires
// L >= 2 (std::invalid_argument) and segment length > L (DataError).
std::vector<FeatureWindow> build_windows(std::span<const double> segment,
                                         std::size_t window_len);

}  // namespace tailvar
