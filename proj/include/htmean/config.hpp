#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace htmean {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// "%.17g" — enough digits for exact double round-trips.
std::string format_double17(double v);

// Flat key=value store with a fixed key set. A Config starts from a schema
// (every key present with its default); files and overrides can only touch
// known keys, and unknown ones are reported together in a single error.
// File format: one key=value per line, blank lines and #-comment lines
// ignored, whitespace around key and value trimmed.
class Config {
 public:
  Config() = default;
  explicit Config(std::map<std::string, std::string> schema);

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);
  void set_double(const std::string& key, double v);
  void set_int(const std::string& key, int64_t v);

  void apply_file(const std::string& path);
  void apply_override(const std::string& key_equals_value);

  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  int64_t get_int(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<int64_t> get_int_list(const std::string& key) const;
  std::vector<std::string> get_str_list(const std::string& key) const;

  // Sorted "key=value" lines; the resolved-configuration echo.
  std::string echo() const;
  const std::map<std::string, std::string>& items() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace htmean
