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

// Deliberate faults used by `verify` to show that its checks detect
// tampering. Never active unless a ScopedMutation is alive.

#include <atomic>

namespace heavytail {

enum class Mutation {
  kNone = 0,
  // Contraction constant A uses 4 in place of 3 in its denominator.
  kAConstant = 1,
  // Reference sampler draws its chi-square with nu + 2 degrees of freedom.
  kBetaParams = 2,
};

inline std::atomic<Mutation>& mutation_state() noexcept {
  static std::atomic<Mutation> state{Mutation::kNone};
  return state;
}

inline Mutation active_mutation() noexcept {
  return mutation_state().load(std::memory_order_relaxed);
}

class ScopedMutation {
 public:
  explicit ScopedMutation(Mutation m) : prev_(mutation_state().exchange(m)) {}
  ~ScopedMutation() { mutation_state().store(prev_); }
  ScopedMutation(const ScopedMutation&) = delete;
  ScopedMutation& operator=(const ScopedMutation&) = delete;

 private:
  Mutation prev_;
};

}  // namespace heavytail
