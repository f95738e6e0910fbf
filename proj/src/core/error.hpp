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

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace heavytail {

// Numeric values are part of the C ABI (see heavytail.h); append only.
enum class ErrorCode : int {
  kOk = 0,
  kInvalidArgument = 1,
  kDimensionMismatch = 2,
  kNonNormalizable = 3,
  kInapplicable = 4,
  kMomentsInfinite = 5,
  kUnsupportedOracle = 6,
  kChainDiverged = 7,
  kNonPositivePotential = 8,
  kNonFinite = 9,
  kParse = 10,
  kValidation = 11,
  kIo = 12,
  kInternal = 13,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// A theorem precondition failed; `value` is the offending quantity
// (e.g. the non-positive contraction margin).
class Inapplicable : public Error {
 public:
  Inapplicable(const std::string& what, double value)
      : Error(ErrorCode::kInapplicable, what), value_(value) {}
  double value() const noexcept { return value_; }

 private:
  double value_;
};

class ChainDiverged : public Error {
 public:
  ChainDiverged(std::uint64_t chain, std::uint64_t iteration,
                std::vector<double> state);
  std::uint64_t chain() const noexcept { return chain_; }
  std::uint64_t iteration() const noexcept { return iteration_; }
  const std::vector<double>& state() const noexcept { return state_; }

 private:
  std::uint64_t chain_;
  std::uint64_t iteration_;
  std::vector<double> state_;
};

// Configuration failed validation. Every violated rule is listed.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const noexcept {
    return violations_;
  }

 private:
  std::vector<std::string> violations_;
};

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

}  // namespace heavytail
