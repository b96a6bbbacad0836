#pragma once

#include <stdexcept>
#include <string>

namespace tailvar {

// Problem with user-supplied data: bad CSV cell, missing column, series too
// short for the requested transform.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure at runtime: diverged optimization, degenerate likelihood,
// non-finite loss.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tailvar
