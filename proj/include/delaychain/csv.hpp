#pragma once

#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace delaychain {

/// Shortest round-trip decimal representation (via to_chars), so emitted
/// files are bit-identical across runs and parse back exactly.
std::string format_double(double v);

/// CSV with a '#'-prefixed metadata block (key = value lines) before the
/// column header. The block parses back through the config reader, so an
/// output file doubles as the configuration that reproduces it.
class CsvWriter {
public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}

  void comment(const std::string& text);
  void keyval(const std::string& key, const std::string& value);
  void keyval(const std::string& key, double value);
  void header(std::span<const std::string> names);
  void row(std::span<const double> values);

private:
  std::ostream& os_;
};

}  // namespace delaychain
