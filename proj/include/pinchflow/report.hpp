#pragma once

// Machine-parseable estimate report: ordered key-value lines
//     check.pinching.pass = true
//     const.cSharp = 0.2031...
// Written with full double precision so reports are reproducible inputs.

#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pinchflow/csv.hpp"
#include "pinchflow/errors.hpp"

namespace pinchflow {

class EstimateReport {
 public:
  void set(const std::string& key, const std::string& value) { put(key, value); }
  void set(const std::string& key, double value) { put(key, format_g17(value)); }
  void set(const std::string& key, long value) { put(key, std::to_string(value)); }
  void set(const std::string& key, int value) { put(key, std::to_string(value)); }
  void set(const std::string& key, bool value) { put(key, value ? "true" : "false"); }

  bool has(const std::string& key) const { return find(key) >= 0; }

  std::string get(const std::string& key) const {
    const int i = find(key);
    if (i < 0) throw config_error("missing report key: " + key);
    return entries_[i].second;
  }
  double get_double(const std::string& key) const { return std::stod(get(key)); }
  bool get_bool(const std::string& key) const { return get(key) == "true"; }

  // Every key of the form check.*.pass must be true.
  bool all_pass() const {
    for (const auto& [k, v] : entries_)
      if (k.size() > 5 && k.compare(0, 6, "check.") == 0 &&
          k.compare(k.size() - 5, 5, ".pass") == 0 && v != "true")
        return false;
    return true;
  }

  std::string serialize() const {
    std::ostringstream out;
    for (const auto& [k, v] : entries_) out << k << " = " << v << '\n';
    return out.str();
  }

  void write_file(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw config_error("cannot write report: " + path);
    f << serialize();
  }

  static EstimateReport parse_text(const std::string& text) {
    EstimateReport r;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const size_t eq = line.find('=');
      if (eq == std::string::npos) throw config_error("malformed report line: " + line);
      auto trim = [](std::string s) {
        size_t b = s.find_first_not_of(" \t\r");
        size_t e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
      };
      r.put(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return r;
  }

  static EstimateReport parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw config_error("cannot open report: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_text(buf.str());
  }

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

 private:
  int find(const std::string& key) const {
    for (size_t i = 0; i < entries_.size(); ++i)
      if (entries_[i].first == key) return static_cast<int>(i);
    return -1;
  }
  void put(const std::string& key, const std::string& value) {
    const int i = find(key);
    if (i >= 0)
      entries_[i].second = value;
    else
      entries_.push_back({key, value});
  }

  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace pinchflow
