#pragma once

#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace chemostab {

/// Shortest round-trip decimal form of a double ("%.17g"); locale independent.
std::string format_double(double x);

/// Comma-separated writer with '#' metadata lines ahead of the header row.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}

  void meta(const std::string& key, const std::string& value);
  void meta(const std::string& key, double value) { meta(key, format_double(value)); }
  void header(std::span<const std::string> columns);
  void header(std::initializer_list<std::string> columns) {
    header(std::span<const std::string>(columns.begin(), columns.size()));
  }
  void row(std::span<const double> values);
  void row(std::initializer_list<double> values) {
    row(std::span<const double>(values.begin(), values.size()));
  }
  void row_strings(std::span<const std::string> cells);

 private:
  std::ostream& os_;
};

}  // namespace chemostab
