#include "pcl/timeseries.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace pcl {

std::size_t TimeSeries::column_index(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw std::out_of_range("time series has no column '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

bool TimeSeries::has_column(const std::string& name) const {
  return std::find(columns.begin(), columns.end(), name) != columns.end();
}

std::vector<double> TimeSeries::column(const std::string& name) const {
  const std::size_t j = column_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[j]);
  return out;
}

double TimeSeries::sampling_interval() const {
  if (rows.size() < 2) throw std::runtime_error("time series too short to infer a sampling interval");
  const double dt = (rows.back()[0] - rows.front()[0]) / static_cast<double>(rows.size() - 1);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (std::abs(rows[i][0] - rows[i - 1][0] - dt) > 1e-6 * dt)
      throw std::runtime_error("time series is not uniformly sampled");
  }
  return dt;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void TimeSeries::write_csv(std::ostream& os, bool header) const {
  if (header) {
    for (std::size_t j = 0; j < columns.size(); ++j) os << (j ? "," : "") << columns[j];
    os << '\n';
  }
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < r.size(); ++j) os << (j ? "," : "") << format_double(r[j]);
    os << '\n';
  }
}

TimeSeries TimeSeries::read_csv(std::istream& is) {
  TimeSeries ts;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty CSV input");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) ts.columns.push_back(cell);
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(ts.columns.size());
    const char* p = line.data();
    const char* end = p + line.size();
    while (p < end) {
      double v = 0.0;
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) throw std::runtime_error("malformed CSV number in line: " + line);
      row.push_back(v);
      p = res.ptr;
      if (p < end && *p == ',') ++p;
    }
    if (row.size() != ts.columns.size()) throw std::runtime_error("CSV row width mismatch: " + line);
    ts.rows.push_back(std::move(row));
  }
  return ts;
}

}  // namespace pcl
