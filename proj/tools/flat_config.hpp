// Copyright 2026 The mcs Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MCS_TOOLS_FLAT_CONFIG_HPP_
#define MCS_TOOLS_FLAT_CONFIG_HPP_

// `key = value` lines; `#` starts a comment. Every key must be known to the
// command that reads the file.

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mcs/csv.hpp"
#include "mcs/error.hpp"

namespace mcs::tools {

class FlatConfig {
 public:
  FlatConfig() = default;

  static FlatConfig load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open config file " + path);
    FlatConfig c;
    c.base_ = std::filesystem::path(path).parent_path();
    std::string line;
    long lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = csv::trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw InputError(path + ":" + std::to_string(lineno) + ": expected key = value");
      }
      const std::string key = csv::trim(line.substr(0, eq));
      if (key.empty()) throw InputError(path + ":" + std::to_string(lineno) + ": empty key");
      if (c.values_.count(key)) throw InputError(path + ":" + std::to_string(lineno) + ": duplicate key " + key);
      c.values_[key] = csv::trim(line.substr(eq + 1));
    }
    return c;
  }

  void allow_only(const std::set<std::string>& keys) const {
    for (const auto& [k, v] : values_) {
      if (!keys.count(k)) throw InputError("unknown config key '" + k + "'");
    }
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string str(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  std::string required(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end() || it->second.empty()) throw InputError("config key '" + key + "' is required");
    return it->second;
  }

  // Relative paths are taken relative to the config file.
  std::string path(const std::string& key) const {
    const std::filesystem::path p(required(key));
    return p.is_absolute() ? p.string() : (base_ / p).string();
  }

  double number(const std::string& key, double fallback) const {
    return has(key) ? csv::parse_double(values_.at(key), "config key '" + key + "'") : fallback;
  }

  long integer(const std::string& key, long fallback) const {
    return has(key) ? csv::parse_long(values_.at(key), "config key '" + key + "'") : fallback;
  }

  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = values_.at(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw InputError("config key '" + key + "' must be true or false");
  }

  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) const {
    if (!has(key)) return fallback;
    std::vector<double> out;
    for (const std::string& c : csv::split_line(values_.at(key))) {
      out.push_back(csv::parse_double(c, "config key '" + key + "'"));
    }
    return out;
  }

  std::vector<long> integers(const std::string& key, const std::vector<long>& fallback) const {
    if (!has(key)) return fallback;
    std::vector<long> out;
    for (const std::string& c : csv::split_line(values_.at(key))) {
      out.push_back(csv::parse_long(c, "config key '" + key + "'"));
    }
    return out;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::filesystem::path base_;
};

}  // namespace mcs::tools

#endif  // MCS_TOOLS_FLAT_CONFIG_HPP_
