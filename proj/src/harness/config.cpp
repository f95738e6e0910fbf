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

#include "harness/config.hpp"

#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "core/error.hpp"

namespace heavytail::config {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

Document Document::parse(const std::string& text) {
  Document doc;
  std::istringstream in(text);
  std::string raw;
  std::string current;
  doc.sections_[current];
  doc.order_.push_back(current);
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    std::ostringstream os;
    os << "line " << lineno << ": " << msg;
    throw Error(ErrorCode::kParse, os.str());
  };
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      current = trim(line.substr(1, line.size() - 2));
      if (current.empty()) fail("empty section name");
      if (!doc.sections_.count(current)) doc.order_.push_back(current);
      doc.sections_[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected `key = value`");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail("empty key");
    auto& sec = doc.sections_[current];
    if (sec.count(key)) fail("duplicate key `" + key + "`");
    sec[key] = Entry{value, lineno};
  }
  return doc;
}

Document Document::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

bool Document::has_section(const std::string& s) const {
  return sections_.count(s) != 0;
}

const std::map<std::string, Entry>* Document::section(
    const std::string& name) const {
  auto it = sections_.find(name);
  return it == sections_.end() ? nullptr : &it->second;
}

std::vector<std::string> Document::section_names() const { return order_; }

std::optional<std::string> Document::get(const std::string& s,
                                         const std::string& key) const {
  auto it = sections_.find(s);
  if (it == sections_.end()) return std::nullopt;
  auto kt = it->second.find(key);
  if (kt == it->second.end()) return std::nullopt;
  return kt->second.value;
}

namespace {

[[noreturn]] void bad(const std::string& what, const std::string& s,
                      const char* kind) {
  throw Error(ErrorCode::kParse,
              what + ": expected " + kind + ", got `" + s + "`");
}

}  // namespace

double to_double(const std::string& s, const std::string& what) {
  const std::string t = trim(s);
  if (t.empty()) bad(what, s, "a number");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE) bad(what, s, "a number");
  return v;
}

std::int64_t to_int(const std::string& s, const std::string& what) {
  const std::string t = trim(s);
  std::int64_t v = 0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    bad(what, s, "an integer");
  }
  return v;
}

std::uint64_t to_uint(const std::string& s, const std::string& what) {
  const std::string t = trim(s);
  std::uint64_t v = 0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    bad(what, s, "a non-negative integer");
  }
  return v;
}

bool to_bool(const std::string& s, const std::string& what) {
  const std::string t = trim(s);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  bad(what, s, "true or false");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  if (!s.empty() && s.back() == ',') out.emplace_back();
  return out;
}

std::vector<double> to_double_list(const std::string& s,
                                   const std::string& what) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(to_double(item, what));
  return out;
}

}  // namespace heavytail::config
