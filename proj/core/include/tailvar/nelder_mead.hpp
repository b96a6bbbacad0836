#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "tailvar/linalg.hpp"

namespace tailvar {

struct NelderMeadOptions {
  std::size_t max_iterations = 2000;
  // Converged when the simplex's function-value spread falls below
  // f_tolerance * (|f_best| + f_tolerance).
  double f_tolerance = 1e-10;
};

struct NelderMeadResult {
  Vec x;
  double f = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
};

// Minimizes f over R^d starting from x0, with the initial simplex spanned by
// x0 + step[i] * e_i.  Standard reflection/expansion/contraction/shrink
// coefficients (1, 2, 0.5, 0.5).  Deterministic.
NelderMeadResult nelder_mead(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x0, std::span<const double> step,
    const NelderMeadOptions& options = {});

}  // namespace tailvar
