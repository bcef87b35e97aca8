// Copyright 2026 The dpcert Authors.
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

#ifndef DPCERT_RNG_H_
#define DPCERT_RNG_H_

#include <cstdint>
#include <limits>
#include <string_view>

namespace dpcert {

// Counter-based generator: the i-th output is a pure function of (key, i),
// computed with the SplitMix64 finalizer. Substreams are derived with
// Split(), which hashes a label or index into a fresh key. Two generators
// with the same key and position produce identical sequences regardless of
// how they were reached, so work can be partitioned across threads without
// changing results.
//
// Satisfies std::uniform_random_bit_generator.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : key_(Mix(seed)), counter_(0) {}

  result_type operator()() { return Mix(key_ + (++counter_) * kGamma); }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  // Independent child stream identified by an integer.
  Rng Split(std::uint64_t index) const;
  // Independent child stream identified by a label, e.g. "noise".
  Rng Split(std::string_view label) const;

  // Uniform double in [0, 1) with 53 random bits.
  double Uniform();
  // Standard normal via the Box-Muller transform (no cached state).
  double Normal();
  // Uniform integer in [0, bound) by rejection, bound >= 1.
  std::uint64_t Below(std::uint64_t bound);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  static std::uint64_t Mix(std::uint64_t z);
  static std::uint64_t HashLabel(std::string_view label);

 private:
  struct FromKey {};
  Rng(FromKey, std::uint64_t key) : key_(key), counter_(0) {}

  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  std::uint64_t key_;
  std::uint64_t counter_;
};

// Labeled seed derivation used by every component that consumes randomness:
// DeriveSeed(root, "prior", i) is stable across runs and platforms.
std::uint64_t DeriveSeed(std::uint64_t root, std::string_view label,
                         std::uint64_t index = 0);

}  // namespace dpcert

#endif  // DPCERT_RNG_H_
