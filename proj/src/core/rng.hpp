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

// Random streams.
//
// Generator: xoshiro256** (Blackman & Vigna), 256-bit state.
//
// Stream splitting: the stream for (seed, id) is seeded by running SplitMix64
// from the key
//
//     key = mix64(mix64(seed) ^ mix64(id ^ 0xD1B54A32D192ED03))
//
// where mix64 is the SplitMix64 output finalizer. The four state words are
// the first four SplitMix64 outputs from `key`. Every chain, projection set
// and reference draw in the library gets its own id, so results never depend
// on evaluation order or thread count.
//
// Normal variates use the Marsaglia polar method; the second variate of each
// accepted pair is cached and returned by the next call.

#include <cstdint>
#include <limits>
#include <span>

namespace heavytail {

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t state) noexcept : state_(state) {}
  constexpr std::uint64_t next() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

 private:
  std::uint64_t state_;
};

// Well-known stream ids for library-internal consumers. Chain streams use
// the chain index directly (0 .. N-1); the fixed ids sit at the top of the
// range so they never collide with a chain.
namespace stream {
inline constexpr std::uint64_t kReference = 0xFFFF'FFFF'0000'0001ULL;
inline constexpr std::uint64_t kReferenceAlt = 0xFFFF'FFFF'0000'0002ULL;
inline constexpr std::uint64_t kProjections = 0xFFFF'FFFF'0000'0003ULL;
inline constexpr std::uint64_t kBootstrap = 0xFFFF'FFFF'0000'0004ULL;
inline constexpr std::uint64_t kInit = 0xFFFF'FFFF'0000'0005ULL;
}  // namespace stream

class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept;
  static Rng stream(std::uint64_t seed, std::uint64_t id) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() noexcept { return next(); }
  result_type next() noexcept;

  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  // Uniform on (0, 1).
  double uniform_open() noexcept;
  double normal() noexcept;
  void fill_normal(std::span<double> out) noexcept;
  // Gamma(shape, 1); Marsaglia-Tsang squeeze for shape >= 1, with the
  // U^(1/shape) boost below 1.
  double gamma(double shape) noexcept;
  // Sum of nu squared normals for integral nu <= 64, 2 * Gamma(nu / 2)
  // otherwise.
  double chi_square(double nu) noexcept;

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace heavytail
