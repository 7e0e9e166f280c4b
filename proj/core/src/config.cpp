#include "noble/config.hpp"

#include "noble/error.hpp"
#include "noble/io_util.hpp"

#include <charconv>
#include <sstream>

namespace noble {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config config;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#' || stripped[0] == ';') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected 'key = value', got '" + stripped + "'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    config.values_[key] = value;
  }
  return config;
}

Config Config::load(const std::string& path) {
  return parse(read_file(path));
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  double v = 0.0;
  const char* begin = it->second.data();
  const char* end = begin + it->second.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end)
    throw ConfigError("key '" + key + "': '" + it->second + "' is not a number");
  return v;
}

int Config::get_int(const std::string& key, int fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  int v = 0;
  const char* begin = it->second.data();
  const char* end = begin + it->second.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end)
    throw ConfigError("key '" + key + "': '" + it->second +
                      "' is not an integer");
  return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + key + "': '" + v + "' is not a boolean");
}

std::uint64_t Config::get_seed(const std::string& key,
                               std::uint64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::uint64_t v = 0;
  const char* begin = it->second.data();
  const char* end = begin + it->second.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end)
    throw ConfigError("key '" + key + "': '" + it->second + "' is not a seed");
  return v;
}

void Config::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

std::string Config::serialize() const {
  std::ostringstream out;
  for (const auto& [key, value] : values_) out << key << " = " << value << '\n';
  return out.str();
}

TrainConfig train_config_from(const Config& config) {
  TrainConfig tc;
  const std::string optimizer = config.get_string("optimizer", "adam");
  if (optimizer == "adam") {
    tc.optimizer = OptimizerKind::adam;
  } else if (optimizer == "sgd") {
    tc.optimizer = OptimizerKind::sgd;
  } else {
    throw ConfigError("optimizer must be adam or sgd, got '" + optimizer + "'");
  }
  tc.learning_rate = config.get_double("learning_rate", tc.learning_rate);
  tc.batch_size = config.get_int("batch_size", tc.batch_size);
  tc.epochs = config.get_int("epochs", tc.epochs);
  tc.seed = config.get_seed("seed", tc.seed);
  tc.l2 = config.get_double("l2", tc.l2);
  tc.patience = config.get_int("patience", tc.patience);
  tc.validate();
  return tc;
}

}  // namespace noble
