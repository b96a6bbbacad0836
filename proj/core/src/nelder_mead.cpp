#include "tailvar/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tailvar {

NelderMeadResult nelder_mead(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x0, std::span<const double> step,
    const NelderMeadOptions& options) {
  const std::size_t d = x0.size();
  if (d == 0 || step.size() != d) {
    throw std::invalid_argument("nelder_mead: bad dimensions");
  }

  std::vector<Vec> simplex(d + 1, Vec(x0.begin(), x0.end()));
  Vec values(d + 1);
  for (std::size_t i = 0; i < d; ++i) simplex[i + 1][i] += step[i];
  for (std::size_t i = 0; i <= d; ++i) values[i] = f(simplex[i]);

  std::vector<std::size_t> order(d + 1);
  Vec centroid(d), candidate(d);
  NelderMeadResult result;

  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[d - 1];

    result.iterations = it;
    const double spread = std::abs(values[worst] - values[best]);
    if (spread <= options.f_tolerance *
                      (std::abs(values[best]) + options.f_tolerance)) {
      result.converged = true;
      break;
    }

    // Centroid of all points except the worst.
    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= d; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < d; ++k) centroid[k] += simplex[i][k];
    }
    for (double& c : centroid) c /= static_cast<double>(d);

    auto blend = [&](double t) {
      for (std::size_t k = 0; k < d; ++k) {
        candidate[k] = centroid[k] + t * (centroid[k] - simplex[worst][k]);
      }
      return f(candidate);
    };

    const double reflected = blend(1.0);
    if (reflected < values[best]) {
      const Vec reflected_point = candidate;
      const double expanded = blend(2.0);
      if (expanded < reflected) {
        simplex[worst] = candidate;
        values[worst] = expanded;
      } else {
        simplex[worst] = reflected_point;
        values[worst] = reflected;
      }
    } else if (reflected < values[second_worst]) {
      simplex[worst] = candidate;
      values[worst] = reflected;
    } else {
      // Contract outside when the reflection at least improved on the worst
      // vertex, inside otherwise.
      const bool outside = reflected < values[worst];
      const double contracted = blend(outside ? 0.5 : -0.5);
      if (contracted <= (outside ? reflected : values[worst])) {
        simplex[worst] = candidate;
        values[worst] = contracted;
      } else {
        // Shrink toward the best vertex.
        for (std::size_t i = 0; i <= d; ++i) {
          if (i == best) continue;
          for (std::size_t k = 0; k < d; ++k) {
            simplex[i][k] =
                simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
          }
          values[i] = f(simplex[i]);
        }
      }
    }
  }

  const std::size_t best = static_cast<std::size_t>(
      std::min_element(values.begin(), values.end()) - values.begin());
  result.x = simplex[best];
  result.f = values[best];
  return result;
}

}  // namespace tailvar
