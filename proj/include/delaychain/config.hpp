#pragma once

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "delaychain/systems.hpp"

namespace delaychain {

/// Plain-text key-value configuration: `key = value` lines, one per line.
/// Lines starting with '#' are read with the marker stripped, so the
/// metadata header of an emitted CSV feeds back in unchanged. Lines
/// without '=' are ignored (data rows, column headers, prose comments).
class KeyValueConfig {
public:
  void set(const std::string& key, const std::string& value);
  /// Inserts only when the key is absent (flag-over-file precedence).
  void set_default(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  std::optional<std::string> get(const std::string& key) const;

  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  int get_int_or(const std::string& key, int fallback) const;
  std::string get_string_or(const std::string& key,
                            const std::string& fallback) const;
  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key) const;

  /// Throws ConfigError when a key outside `allowed` is present.
  void require_known(const std::vector<std::string>& allowed) const;

  /// Keys in sorted order, for deterministic echo.
  std::vector<std::pair<std::string, std::string>> sorted_entries() const;

  static KeyValueConfig parse(std::istream& in);
  static KeyValueConfig parse_file(const std::string& path);

private:
  std::map<std::string, std::string> values_;
};

/// A system description resolved from configuration keys: system name,
/// parameters, delays and weights, chain orders (or the sharp-delay mode).
struct SystemConfig {
  DelaySystem system;
  std::vector<int> orders;  // empty when use_dde
  bool use_dde = false;
};

/// Builds a DelaySystem from keys: `system` (mackey-glass | linear),
/// parameters (`alpha`/`beta`/`gamma` or `a`/`b`/`c`), delays (`T` or
/// `delays` with optional `weights`), and `N` (integer, list, or `dde`).
SystemConfig system_from_config(const KeyValueConfig& cfg);

double parse_double(const std::string& text, const std::string& what);
int parse_int(const std::string& text, const std::string& what);
std::vector<std::string> split_list(const std::string& text);

}  // namespace delaychain
