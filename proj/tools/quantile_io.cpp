#include "quantile_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "tailvar/errors.hpp"

namespace tailvar::cli {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) {
      field.pop_back();
    }
    out.push_back(field);
  }
  return out;
}

double parse_double(const std::string& s, const std::string& path,
                    std::size_t row) {
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError("'" + path + "' row " + std::to_string(row) +
                    ": cannot parse '" + s + "'");
  }
  return value;
}

}  // namespace

void write_quantile_csv(const std::string& path,
                        const std::vector<std::size_t>& t, const Vec& taus,
                        const Matrix& q) {
  if (q.rows() != t.size() || q.cols() != taus.size()) {
    throw std::invalid_argument("write_quantile_csv: shape mismatch");
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  char buffer[64];
  out << 't';
  for (double tau : taus) {
    std::snprintf(buffer, sizeof buffer, ",q_%.9g", tau);
    out << buffer;
  }
  out << '\n';
  for (std::size_t r = 0; r < q.rows(); ++r) {
    out << t[r];
    for (std::size_t k = 0; k < q.cols(); ++k) {
      std::snprintf(buffer, sizeof buffer, ",%.9g", q(r, k));
      out << buffer;
    }
    out << '\n';
  }
  if (!out) throw DataError("failed while writing '" + path + "'");
}

QuantileTable read_quantile_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path + "' is empty");
  const auto header = split_line(line);
  if (header.size() < 2 || header[0] != "t") {
    throw DataError("'" + path + "' is not a quantile table (want t,q_...)");
  }

  QuantileTable table;
  for (std::size_t k = 1; k < header.size(); ++k) {
    if (header[k].rfind("q_", 0) != 0) {
      throw DataError("'" + path + "': unexpected column '" + header[k] + "'");
    }
    table.taus.push_back(parse_double(header[k].substr(2), path, 1));
  }

  std::vector<Vec> rows;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto fields = split_line(line);
    if (fields.size() != header.size()) {
      throw DataError("'" + path + "' row " + std::to_string(row) +
                      ": wrong field count");
    }
    table.t.push_back(static_cast<std::size_t>(
        parse_double(fields[0], path, row)));
    Vec q_row;
    q_row.reserve(fields.size() - 1);
    for (std::size_t k = 1; k < fields.size(); ++k) {
      q_row.push_back(parse_double(fields[k], path, row));
    }
    rows.push_back(std::move(q_row));
  }
  if (rows.empty()) throw DataError("'" + path + "' has no data rows");

  table.q = Matrix(rows.size(), table.taus.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t k = 0; k < table.taus.size(); ++k) {
      table.q(r, k) = rows[r][k];
    }
  }
  return table;
}

}  // namespace tailvar::cli
