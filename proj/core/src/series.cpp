#include "tailvar/series.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tailvar {

namespace {

std::string trim(std::string s) {
  const char* ws = " \t\r\n";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_cell(const std::string& cell, std::size_t row,
                  const std::string& column) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || cell.empty()) {
    throw DataError("row " + std::to_string(row) + ": cannot parse '" + cell +
                    "' in column '" + column + "'");
  }
  if (!std::isfinite(value)) {
    throw DataError("row " + std::to_string(row) + ": non-finite value in '" +
                    column + "'");
  }
  return value;
}

}  // namespace

ReturnSeries load_csv(const std::string& path, const std::string& column,
                      InputKind kind, const std::string& timestamp_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path + "' is empty");
  const auto header = split_fields(line);

  std::size_t value_index = header.size();
  std::size_t ts_index = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == column) value_index = i;
    if (!timestamp_column.empty() && header[i] == timestamp_column) {
      ts_index = i;
    }
  }
  if (value_index == header.size()) {
    throw DataError("column '" + column + "' not found in '" + path + "'");
  }
  if (!timestamp_column.empty() && ts_index == header.size()) {
    throw DataError("column '" + timestamp_column + "' not found in '" + path +
                    "'");
  }

  std::vector<std::string> labels;
  std::vector<double> raw;
  std::size_t row = 1;  // header row
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw DataError("row " + std::to_string(row) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    raw.push_back(parse_cell(fields[value_index], row, column));
    labels.push_back(ts_index < header.size()
                         ? fields[ts_index]
                         : std::to_string(raw.size() - 1));
  }
  if (raw.size() < 2) {
    throw DataError("'" + path + "' has fewer than 2 data rows");
  }

  ReturnSeries series;
  if (kind == InputKind::returns) {
    series.values = std::move(raw);
    series.timestamps = std::move(labels);
  } else {
    series.values.reserve(raw.size() - 1);
    series.timestamps.reserve(raw.size() - 1);
    for (std::size_t i = 1; i < raw.size(); ++i) {
      if (raw[i - 1] == 0.0) {
        throw DataError("zero price before row " + std::to_string(i + 2) +
                        "; cannot form a return");
      }
      series.values.push_back(raw[i] / raw[i - 1] - 1.0);
      series.timestamps.push_back(labels[i]);
    }
  }
  return series;
}

void write_csv(const ReturnSeries& series, const std::string& path,
               const std::string& value_column,
               const std::string& timestamp_column, int digits) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  const bool with_ts = !timestamp_column.empty();
  if (with_ts) out << timestamp_column << ',';
  out << value_column << '\n';
  char buffer[64];
  for (std::size_t i = 0; i < series.values.size(); ++i) {
    if (with_ts) {
      out << (i < series.timestamps.size() ? series.timestamps[i]
                                           : std::to_string(i))
          << ',';
    }
    std::snprintf(buffer, sizeof buffer, "%.*g", digits, series.values[i]);
    out << buffer << '\n';
  }
  if (!out) throw DataError("failed while writing '" + path + "'");
}

std::pair<double, double> mean_and_variance(
    const std::vector<double>& values) {
  const auto n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= n;
  return {mean, var};
}

SeriesSplit split_normalize(const ReturnSeries& series) {
  const std::size_t n = series.size();
  if (n < 50) {
    throw DataError("series too short to split: need >= 50 values, got " +
                    std::to_string(n));
  }
  const std::size_t n_train = (n * 8) / 10;
  const std::size_t n_val = n / 10;

  const std::vector<double> train_values(series.values.begin(),
                                         series.values.begin() + n_train);
  const auto [mean, var] = mean_and_variance(train_values);
  const double sd = std::sqrt(var);
  // A constant segment can leave rounding noise instead of an exact zero
  // variance; anything at that scale is equally unusable.
  if (!(var > 0.0) || sd <= 1e-12 * std::abs(mean)) {
    throw DataError("train segment has zero variance; cannot normalize");
  }

  auto take = [&](std::size_t begin, std::size_t count) {
    ReturnSeries seg;
    seg.values.reserve(count);
    seg.timestamps.reserve(count);
    for (std::size_t i = begin; i < begin + count; ++i) {
      seg.values.push_back((series.values[i] - mean) / sd);
      seg.timestamps.push_back(i < series.timestamps.size()
                                   ? series.timestamps[i]
                                   : std::to_string(i));
    }
    return seg;
  };

  SeriesSplit split;
  split.train = take(0, n_train);
  split.validation = take(n_train, n_val);
  split.test = take(n_train + n_val, n - n_train - n_val);
  split.norm_mean = mean;
  split.norm_std = sd;
  return split;
}

std::vector<double> denormalize(const std::vector<double>& values,
                                double norm_mean, double norm_std) {
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(v * norm_std + norm_mean);
  return out;
}

void write_normalization(const std::string& path, double norm_mean,
                         double norm_std) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%a", norm_mean);
  out << "norm_mean " << buffer << '\n';
  std::snprintf(buffer, sizeof buffer, "%a", norm_std);
  out << "norm_std " << buffer << '\n';
}

std::pair<double, double> read_normalization(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::string key1, key2, val1, val2;
  in >> key1 >> val1 >> key2 >> val2;
  if (!in || key1 != "norm_mean" || key2 != "norm_std") {
    throw DataError("'" + path + "' is not a normalization file");
  }
  return {std::strtod(val1.c_str(), nullptr),
          std::strtod(val2.c_str(), nullptr)};
}

}  // namespace tailvar
