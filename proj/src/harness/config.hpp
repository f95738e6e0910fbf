// Copyright 2026 The heavytail Authors
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

// Flat `key = value` configuration text with [section] headers.
//
//   # comment
//   scenario = demo
//   [target]
//   family = isotropic-student
//   d = 10
//
// Keys before the first header belong to the unnamed section "". Blank
// lines and lines starting with '#' are ignored; values are trimmed.
// Duplicate keys within a section are an error.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace heavytail::config {

struct Entry {
  std::string value;
  int line = 0;
};

class Document {
 public:
  static Document parse(const std::string& text);
  static Document load(const std::string& path);

  bool has_section(const std::string& section) const;
  const std::map<std::string, Entry>* section(const std::string& name) const;
  std::vector<std::string> section_names() const;
  std::optional<std::string> get(const std::string& section,
                                 const std::string& key) const;

 private:
  std::map<std::string, std::map<std::string, Entry>> sections_;
  std::vector<std::string> order_;
};

// Strict conversions; throw Error(kParse) naming `what` on failure.
double to_double(const std::string& s, const std::string& what);
std::int64_t to_int(const std::string& s, const std::string& what);
std::uint64_t to_uint(const std::string& s, const std::string& what);
bool to_bool(const std::string& s, const std::string& what);
std::vector<double> to_double_list(const std::string& s,
                                   const std::string& what);
std::vector<std::string> split_list(const std::string& s);
std::string trim(const std::string& s);

}  // namespace heavytail::config
