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

#include "core/error.hpp"

#include <sstream>

namespace heavytail {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kOk: return "ok";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kNonNormalizable: return "non-normalizable";
    case ErrorCode::kInapplicable: return "inapplicable";
    case ErrorCode::kMomentsInfinite: return "moments-infinite";
    case ErrorCode::kUnsupportedOracle: return "unsupported-oracle";
    case ErrorCode::kChainDiverged: return "chain-diverged";
    case ErrorCode::kNonPositivePotential: return "non-positive-potential";
    case ErrorCode::kNonFinite: return "non-finite";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kValidation: return "validation";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kInternal: return "internal";
  }
  return "unknown";
}

namespace {

std::string diverged_message(std::uint64_t chain, std::uint64_t iteration,
                             const std::vector<double>& state) {
  std::ostringstream os;
  os << "chain " << chain << " diverged at iteration " << iteration
     << " (state:";
  for (std::size_t i = 0; i < state.size() && i < 8; ++i) os << ' ' << state[i];
  if (state.size() > 8) os << " ...";
  os << ')';
  return os.str();
}

std::string join_violations(const std::vector<std::string>& v) {
  std::string out = "configuration invalid:";
  for (const auto& s : v) out += "\n  - " + s;
  return out;
}

}  // namespace

ChainDiverged::ChainDiverged(std::uint64_t chain, std::uint64_t iteration,
                             std::vector<double> state)
    : Error(ErrorCode::kChainDiverged,
            diverged_message(chain, iteration, state)),
      chain_(chain),
      iteration_(iteration),
      state_(std::move(state)) {}

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error(ErrorCode::kValidation, join_violations(violations)),
      violations_(std::move(violations)) {}

}  // namespace heavytail
