#include "tailvar/features.hpp"

#include <stdexcept>
#include <string>

#include "tailvar/errors.hpp"

namespace tailvar {

std::vector<FeatureWindow> build_windows(std::span<const double> segment,
                                         std::size_t window_len) {
  if (window_len < 2) {
    throw std::invalid_argument("build_windows: window length must be >= 2");
  }
  if (segment.size() <= window_len) {
    throw DataError("segment too short: need > " +
                    std::to_string(window_len) + " values, got " +
                    std::to_string(segment.size()));
  }
  const std::size_t count = segment.size() - window_len;
  std::vector<FeatureWindow> windows;
  windows.reserve(count);
  for (std::size_t t = window_len; t < segment.size(); ++t) {
    FeatureWindow w;
    w.t_index = t;
    w.target = segment[t];
    double sum = 0.0;
    for (std::size_t i = t - window_len; i < t; ++i) sum += segment[i];
    w.rbar = sum / static_cast<double>(window_len);
    w.features = Matrix(window_len, 4);
    for (std::size_t i = 0; i < window_len; ++i) {
      const double r = segment[t - window_len + i];
      const double d = r - w.rbar;
      const double d2 = d * d;
      w.features(i, 0) = r;
      w.features(i, 1) = d2;
      w.features(i, 2) = d2 * d;
      w.features(i, 3) = d2 * d2;
    }
    windows.push_back(std::move(w));
  }
  return windows;
}

}  // namespace tailvar
