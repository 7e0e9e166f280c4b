#pragma once

#include "noble/nn.hpp"

#include <map>
#include <optional>
#include <string>

namespace noble {

/// Flat key/value experiment configuration: `key = value` lines, # or ;
/// comments, blank lines ignored. One config fully determines an
/// experiment and is echoed into every output for provenance.
class Config {
 public:
  Config() = default;
  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const;

  void set(const std::string& key, const std::string& value);

  const std::map<std::string, std::string>& values() const { return values_; }

  std::string serialize() const;

 private:
  std::map<std::string, std::string> values_;
};

/// TrainConfig from the standard keys: optimizer, learning_rate, batch_size,
/// epochs, seed, l2, patience.
TrainConfig train_config_from(const Config& config);

}  // namespace noble
