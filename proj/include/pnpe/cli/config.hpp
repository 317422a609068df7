// Copyright 2026 The pnpe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// config.hpp: flat key=value run configuration with typed defaults.
//
//   # comment
//   source.g = 0.3
//   optimizer.restarts = 8
//
// Every key must be known; values are validated when read.

#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pnpe::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Resolved configuration. Keys are kept sorted so serializations are stable.
class RunConfig {
 public:
  RunConfig() : values_(defaults()) {}

  static const std::map<std::string, std::string>& defaults() {
    static const std::map<std::string, std::string> d = {
        {"source.g", "0.3"},
        {"source.t_b", "0.8"},
        {"source.t_c", "0.5"},
        {"source.phi_a", "0"},
        {"source.phi_b", "0"},
        {"source.eta_s", "1"},
        {"loss.eta_D", "1"},
        {"loss.eta_H", "1"},
        {"loss.eta_C", "1"},
        {"loss.eta_Dc", "1"},
        {"loss.gamma", "0.2"},
        {"loss.L", "0"},
        {"optimizer.objective", "analytic"},
        {"optimizer.restarts", "8"},
        {"optimizer.max_evaluations", "20000"},
        {"optimizer.diameter_tol", "1e-9"},
        {"optimizer.symmetric_ansatz", "false"},
        {"optimizer.threshold_tol", "1e-4"},
        {"optimizer.polish_evaluations", "300"},
        {"sweep.eta_min", "0.65"},
        {"sweep.eta_max", "1"},
        {"sweep.eta_step", "0.01"},
        {"sweep.eta_c_min", "1e-4"},
        {"sweep.eta_c_max", "1"},
        {"sweep.eta_c_points", "41"},
        {"sweep.eta_h_step", "0.1"},
        {"success.g", "0.33"},
        {"success.t_sppe", "0.1"},
        {"success.t_b", "0.8"},
        {"metrics.repetition_rate", "1e6"},
        {"run.seed", "20240611"},
        {"run.format", "csv"},
        {"run.cutoff", "6"},
    };
    return d;
  }

  static bool known(const std::string& key) { return defaults().count(key) != 0; }

  void set(const std::string& key, const std::string& value) {
    if (!known(key)) throw ConfigError("unknown configuration key '" + key + "'");
    values_[key] = value;
  }

  // Parses "key=value" (used by --set and config files).
  void set_assignment(const std::string& line, const std::string& where = "--set") {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key=value, got '" + line + "'");
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }

  void load_stream(std::istream& in, const std::string& name) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      set_assignment(line, name + ":" + std::to_string(lineno));
    }
  }

  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    load_stream(in, path);
  }

  const std::string& raw(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown configuration key '" + key + "'");
    return it->second;
  }

  double number(const std::string& key) const {
    const auto& s = raw(key);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw ConfigError(key + ": '" + s + "' is not a number");
    }
    if (used != s.size() || !std::isfinite(v)) throw ConfigError(key + ": '" + s + "' is not a finite number");
    return v;
  }

  double number_in(const std::string& key, double lo, double hi) const {
    const double v = number(key);
    if (v < lo || v > hi) {
      std::ostringstream os;
      os << key << ": " << v << " outside [" << lo << ", " << hi << "]";
      throw ConfigError(os.str());
    }
    return v;
  }

  std::int64_t integer(const std::string& key, std::int64_t lo, std::int64_t hi) const {
    const auto& s = raw(key);
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &used);
    } catch (const std::exception&) {
      throw ConfigError(key + ": '" + s + "' is not an integer");
    }
    if (used != s.size()) throw ConfigError(key + ": '" + s + "' is not an integer");
    if (v < lo || v > hi) throw ConfigError(key + ": " + s + " out of range");
    return v;
  }

  std::uint64_t seed() const {
    const auto& s = raw("run.seed");
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      throw ConfigError("run.seed: '" + s + "' is not a non-negative integer");
    }
    if (used != s.size() || s.front() == '-') throw ConfigError("run.seed: '" + s + "' is not a non-negative integer");
    return v;
  }

  bool boolean(const std::string& key) const {
    const auto& s = raw(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError(key + ": '" + s + "' is not a boolean");
  }

  std::string choice(const std::string& key, const std::vector<std::string>& allowed) const {
    const auto& s = raw(key);
    for (const auto& a : allowed)
      if (s == a) return s;
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : "|") + a;
    throw ConfigError(key + ": '" + s + "' is not one of " + list);
  }

  const std::map<std::string, std::string>& values() const { return values_; }

  std::string serialize() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
    return out;
  }

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

 private:
  std::map<std::string, std::string> values_;
};

// 64-bit FNV-1a, used as the resolved-config fingerprint.
inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Linear grid "lo:hi:step", inclusive of hi up to rounding.
inline std::vector<double> linear_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi))
    throw ConfigError("grid: need finite lo <= hi and step > 0");
  const double span = (hi - lo) / step;
  if (span > 1e6) throw ConfigError("grid: too many points");
  const auto n = static_cast<std::size_t>(std::floor(span + 1e-9));
  std::vector<double> g;
  for (std::size_t k = 0; k <= n; ++k) g.push_back(lo + static_cast<double>(k) * step);
  return g;
}

// Logarithmic grid of `points` values from lo to hi.
inline std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  if (!(lo > 0.0) || !(hi >= lo) || points < 2) throw ConfigError("grid: need 0 < lo <= hi and at least 2 points");
  std::vector<double> g;
  const double a = std::log10(lo), b = std::log10(hi);
  for (std::size_t k = 0; k < points; ++k)
    g.push_back(std::pow(10.0, a + (b - a) * static_cast<double>(k) / static_cast<double>(points - 1)));
  return g;
}

inline std::vector<double> parse_triplet(const std::string& spec) {
  std::vector<double> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ConfigError("grid: '" + spec + "' must look like lo:hi:step");
    }
    if (used != item.size()) throw ConfigError("grid: '" + spec + "' must look like lo:hi:step");
    parts.push_back(v);
  }
  if (parts.size() != 3) throw ConfigError("grid: '" + spec + "' must look like lo:hi:step");
  return parts;
}

}  // namespace pnpe::cli
