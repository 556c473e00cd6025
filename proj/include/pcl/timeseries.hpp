#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pcl {

// Row-major table of uniformly sampled observables; the first column is t.
struct TimeSeries {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column_index(const std::string& name) const;
  bool has_column(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;
  std::size_t size() const { return rows.size(); }
  // Spacing of the t column; throws if the grid is not uniform.
  double sampling_interval() const;

  void write_csv(std::ostream& os, bool header = true) const;
  static TimeSeries read_csv(std::istream& is);
};

// Shortest round-trip decimal form, so identical doubles give identical bytes.
std::string format_double(double v);

}  // namespace pcl
