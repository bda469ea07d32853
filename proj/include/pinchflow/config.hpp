#pragma once

// Plain-text key-value configuration with dotted sections:
//     flow.cflNumber = 0.4
//     # comment
// Keys are case-sensitive; values are trimmed strings converted on demand.

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "pinchflow/errors.hpp"

namespace pinchflow {

class Config {
 public:
  static Config parse_text(const std::string& text) {
    Config c;
    std::istringstream in(text);
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
      ++lineNo;
      const size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const size_t eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw config_error("line " + std::to_string(lineNo) + ": expected key = value");
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string val = trim(trimmed.substr(eq + 1));
      if (key.empty()) throw config_error("line " + std::to_string(lineNo) + ": empty key");
      c.values_[key] = val;
    }
    return c;
  }

  static Config parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw config_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_text(buf.str());
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw config_error("missing config key: " + key);
    return it->second;
  }
  std::string get_string(const std::string& key, const std::string& dflt) const {
    auto it = values_.find(key);
    return it == values_.end() ? dflt : it->second;
  }

  double get_double(const std::string& key) const { return to_double(key, get_string(key)); }
  double get_double(const std::string& key, double dflt) const {
    return has(key) ? get_double(key) : dflt;
  }

  long get_int(const std::string& key) const {
    const std::string v = get_string(key);
    char* end = nullptr;
    const long r = std::strtol(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
      throw config_error("config key " + key + " is not an integer: " + v);
    return r;
  }
  long get_int(const std::string& key, long dflt) const { return has(key) ? get_int(key) : dflt; }

  bool get_bool(const std::string& key, bool dflt) const {
    if (!has(key)) return dflt;
    const std::string v = get_string(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw config_error("config key " + key + " is not a boolean: " + v);
  }

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  static std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }
  static double to_double(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double r = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
      throw config_error("config key " + key + " is not a number: " + v);
    return r;
  }

  std::map<std::string, std::string> values_;
};

}  // namespace pinchflow
