// Copyright 2026 The CatRec Authors
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

#pragma once

#include <filesystem>
#include <initializer_list>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace catrec {

/// Flat `key = value` configuration. Blank lines and lines starting with
/// '#' are ignored. Later keys override earlier ones.
class FlatConfig {
 public:
  FlatConfig() = default;
  explicit FlatConfig(std::map<std::string, std::string> values) : values_(std::move(values)) {}

  static FlatConfig parse(std::istream& in);
  static FlatConfig load(const std::filesystem::path& path);

  /// For every key, an environment variable `<prefix><KEY>` (dots become
  /// underscores, letters upper-cased) replaces the value if set. Keys in
  /// `extra_keys` are considered even when absent from the file.
  void apply_env_overrides(std::string_view prefix,
                           std::initializer_list<std::string_view> extra_keys = {});

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> find(const std::string& key) const;

  std::string get_string(const std::string& key, std::string fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  void write(std::ostream& out) const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace catrec
