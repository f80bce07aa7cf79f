#include "htmean/config.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <utility>

namespace htmean {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (v.empty()) {
    throw ConfigError("config key '" + key + "' has an empty numeric value");
  }
  char* end = nullptr;
  const double out = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size()) {
    throw ConfigError("config key '" + key + "': '" + v +
                      "' is not a number");
  }
  return out;
}

int64_t parse_int(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (v.empty()) {
    throw ConfigError("config key '" + key + "' has an empty integer value");
  }
  char* end = nullptr;
  const long long out = std::strtoll(v.c_str(), &end, 10);
  if (end != v.c_str() + v.size()) {
    throw ConfigError("config key '" + key + "': '" + v +
                      "' is not an integer");
  }
  return static_cast<int64_t>(out);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

std::string format_double17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Config::Config(std::map<std::string, std::string> schema)
    : kv_(std::move(schema)) {}

bool Config::has(const std::string& key) const { return kv_.count(key) > 0; }

void Config::set(const std::string& key, const std::string& value) {
  auto it = kv_.find(key);
  if (it == kv_.end()) {
    throw ConfigError("unknown config key: " + key);
  }
  it->second = trim(value);
}

void Config::set_double(const std::string& key, double v) {
  set(key, format_double17(v));
}

void Config::set_int(const std::string& key, int64_t v) {
  set(key, std::to_string(v));
}

void Config::apply_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file: " + path);
  }
  std::vector<std::string> unknown;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key=value, got '" + t + "'");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": empty key");
    }
    if (!has(key)) {
      unknown.push_back(key);
      continue;
    }
    kv_[key] = value;
  }
  if (!unknown.empty()) {
    std::string msg = "unknown config keys:";
    for (const std::string& k : unknown) msg += " " + k;
    throw ConfigError(msg);
  }
}

void Config::apply_override(const std::string& key_equals_value) {
  const std::size_t eq = key_equals_value.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override must be key=value, got '" + key_equals_value +
                      "'");
  }
  const std::string key = trim(key_equals_value.substr(0, eq));
  if (!has(key)) {
    throw ConfigError("unknown config keys: " + key);
  }
  kv_[key] = trim(key_equals_value.substr(eq + 1));
}

const std::string& Config::get(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) {
    throw ConfigError("unknown config key: " + key);
  }
  return it->second;
}

double Config::get_double(const std::string& key) const {
  return parse_double(key, get(key));
}

int64_t Config::get_int(const std::string& key) const {
  return parse_int(key, get(key));
}

bool Config::get_bool(const std::string& key) const {
  const std::string v = trim(get(key));
  if (v == "0" || v == "false") return false;
  if (v == "1" || v == "true") return true;
  throw ConfigError("config key '" + key + "': '" + v +
                    "' is not a boolean (use 0/1/true/false)");
}

std::vector<double> Config::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const std::string& item : split_list(get(key))) {
    out.push_back(parse_double(key, item));
  }
  return out;
}

std::vector<int64_t> Config::get_int_list(const std::string& key) const {
  std::vector<int64_t> out;
  for (const std::string& item : split_list(get(key))) {
    out.push_back(parse_int(key, item));
  }
  return out;
}

std::vector<std::string> Config::get_str_list(const std::string& key) const {
  return split_list(get(key));
}

std::string Config::echo() const {
  std::string out;
  for (const auto& [k, v] : kv_) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

}  // namespace htmean
