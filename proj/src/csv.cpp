#include "chemostab/csv.hpp"

#include <array>
#include <charconv>

namespace chemostab {

std::string format_double(double x) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

void CsvWriter::meta(const std::string& key, const std::string& value) {
  os_ << "# " << key << ": " << value << '\n';
}

void CsvWriter::header(std::span<const std::string> columns) { row_strings(columns); }

void CsvWriter::row(std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) os_ << ',';
    os_ << format_double(values[i]);
  }
  os_ << '\n';
}

void CsvWriter::row_strings(std::span<const std::string> cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) os_ << ',';
    os_ << cells[i];
  }
  os_ << '\n';
}

}  // namespace chemostab
