#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "tailvar/errors.hpp"

namespace tailvar {

// A return series in file order.  Timestamps are opaque labels carried along
// for output; when the input has no timestamp column they are row ordinals.
struct ReturnSeries {
  std::vector<std::string> timestamps;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

enum class InputKind { returns, prices };

// Parses a CSV with a header row and one value column.  In `prices` mode the
// column holds price levels and consecutive rows are turned into simple
// returns r_t = P_t / P_{t-1} - 1.  Malformed cells are reported with their
// 1-based row number (header = row 1).  Throws DataError.
ReturnSeries load_csv(const std::string& path, const std::string& column,
                      InputKind kind = InputKind::returns,
                      const std::string& timestamp_column = "");

// Writes `series` as CSV.  `digits` is the number of significant digits for
// the values; pass 17 for bit-exact round-trips.
void write_csv(const ReturnSeries& series, const std::string& path,
               const std::string& value_column = "r",
               const std::string& timestamp_column = "t", int digits = 9);

// Chronological train/validation/test split with train-set normalization
// applied to all three segments.
struct SeriesSplit {
  ReturnSeries train;
  ReturnSeries validation;
  ReturnSeries test;
  double norm_mean = 0.0;
  double norm_std = 1.0;
};

// Splits into floor(0.8 n) / floor(0.1 n) / remainder, then normalizes every
// segment by the train segment's mean and standard deviation (population
// variance, 1/n).  Throws DataError if n < 50 or the train segment has zero
// variance.
SeriesSplit split_normalize(const ReturnSeries& series);

// Inverse of the normalization: x * norm_std + norm_mean, elementwise.
std::vector<double> denormalize(const std::vector<double>& values,
                                double norm_mean, double norm_std);

// Mean and population variance (1/n) of a series segment.
std::pair<double, double> mean_and_variance(const std::vector<double>& values);

// Key/value persistence for the normalization constants, written in C99
// hexfloat so reloading reproduces the exact doubles.
void write_normalization(const std::string& path, double norm_mean,
                         double norm_std);
std::pair<double, double> read_normalization(const std::string& path);

}  // namespace tailvar
