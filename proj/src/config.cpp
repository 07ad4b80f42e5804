#include "delaychain/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "delaychain/errors.hpp"

namespace delaychain {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_'))
      return false;
  return true;
}

}  // namespace

double parse_double(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  if (t == "inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto* begin = t.data();
  const auto* end = t.data() + t.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end)
    throw ConfigError(what + ": not a number: '" + t + "'");
  return v;
}

int parse_int(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  int v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
    throw ConfigError(what + ": not an integer: '" + t + "'");
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  if (!valid_key(key)) throw ConfigError("invalid configuration key: " + key);
  values_[key] = trim(value);
}

void KeyValueConfig::set_default(const std::string& key,
                                 const std::string& value) {
  if (!has(key)) set(key, value);
}

bool KeyValueConfig::has(const std::string& key) const {
  return values_.count(key) > 0;
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

double KeyValueConfig::get_double(const std::string& key) const {
  const auto v = get(key);
  if (!v) throw ConfigError("missing required key: " + key);
  return parse_double(*v, key);
}

int KeyValueConfig::get_int(const std::string& key) const {
  const auto v = get(key);
  if (!v) throw ConfigError("missing required key: " + key);
  return parse_int(*v, key);
}

std::string KeyValueConfig::get_string(const std::string& key) const {
  const auto v = get(key);
  if (!v) throw ConfigError("missing required key: " + key);
  return *v;
}

double KeyValueConfig::get_double_or(const std::string& key,
                                     double fallback) const {
  const auto v = get(key);
  return v ? parse_double(*v, key) : fallback;
}

int KeyValueConfig::get_int_or(const std::string& key, int fallback) const {
  const auto v = get(key);
  return v ? parse_int(*v, key) : fallback;
}

std::string KeyValueConfig::get_string_or(const std::string& key,
                                          const std::string& fallback) const {
  const auto v = get(key);
  return v ? *v : fallback;
}

std::vector<double> KeyValueConfig::get_double_list(
    const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_list(get_string(key)))
    out.push_back(parse_double(item, key));
  return out;
}

std::vector<int> KeyValueConfig::get_int_list(const std::string& key) const {
  std::vector<int> out;
  for (const auto& item : split_list(get_string(key)))
    out.push_back(parse_int(item, key));
  return out;
}

void KeyValueConfig::require_known(
    const std::vector<std::string>& allowed) const {
  for (const auto& [key, value] : values_) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError("unknown configuration key: " + key);
  }
}

std::vector<std::pair<std::string, std::string>>
KeyValueConfig::sorted_entries() const {
  return {values_.begin(), values_.end()};
}

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
  KeyValueConfig cfg;
  std::string line;
  while (std::getline(in, line)) {
    std::string body = trim(line);
    if (!body.empty() && body[0] == '#') body = trim(body.substr(1));
    const auto eq = body.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = trim(body.substr(0, eq));
    if (!valid_key(key)) continue;
    cfg.set(key, body.substr(eq + 1));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration file: " + path);
  return parse(in);
}

SystemConfig system_from_config(const KeyValueConfig& cfg) {
  SystemConfig out;

  std::vector<DelaySpec> delays;
  if (cfg.has("delays")) {
    const auto taus = cfg.get_double_list("delays");
    std::vector<double> weights(taus.size(), 1.0 / taus.size());
    if (cfg.has("weights")) {
      const auto w = cfg.get_double_list("weights");
      if (w.size() != taus.size())
        throw ConfigError("weights: need one weight per delay");
      weights = w;
    }
    for (std::size_t j = 0; j < taus.size(); ++j)
      delays.push_back({taus[j], weights[j]});
  } else {
    delays.push_back({cfg.get_double("T"), 1.0});
  }

  const std::string name = cfg.get_string_or("system", "mackey-glass");
  if (name == "mackey-glass") {
    MackeyGlassParams p;
    p.alpha = cfg.get_double_or("alpha", p.alpha);
    p.beta = cfg.get_double_or("beta", p.beta);
    p.gamma = cfg.get_double_or("gamma", p.gamma);
    out.system = make_mackey_glass(p, delays);
  } else if (name == "linear") {
    LinearDelayParams p;
    p.a = cfg.get_double("a");
    p.b = cfg.get_double("b");
    p.c = cfg.get_double_or("c", 0.0);
    out.system = make_linear(p, delays);
  } else {
    throw ConfigError("unknown system: " + name);
  }

  const std::string n = cfg.get_string_or("N", "dde");
  if (n == "dde") {
    out.use_dde = true;
    if (delays.size() != 1)
      throw ConfigError("the sharp-delay solver supports a single delay");
  } else {
    for (const auto& item : split_list(n))
      out.orders.push_back(parse_int(item, "N"));
    if (out.orders.size() == 1 && delays.size() > 1)
      out.orders.assign(delays.size(), out.orders[0]);
    if (out.orders.size() != delays.size())
      throw ConfigError("N: need one order per delay");
  }
  return out;
}

}  // namespace delaychain
