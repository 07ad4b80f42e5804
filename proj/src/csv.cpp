#include "delaychain/csv.hpp"

#include <charconv>
#include <cmath>

namespace delaychain {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void CsvWriter::comment(const std::string& text) { os_ << "# " << text << "\n"; }

void CsvWriter::keyval(const std::string& key, const std::string& value) {
  os_ << "# " << key << " = " << value << "\n";
}

void CsvWriter::keyval(const std::string& key, double value) {
  keyval(key, format_double(value));
}

void CsvWriter::header(std::span<const std::string> names) {
  for (std::size_t i = 0; i < names.size(); ++i)
    os_ << (i ? "," : "") << names[i];
  os_ << "\n";
}

void CsvWriter::row(std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i)
    os_ << (i ? "," : "") << format_double(values[i]);
  os_ << "\n";
}

}  // namespace delaychain
