// Copyright 2026 The Neuromorphic Federated Learning Authors
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

#ifndef NFL_QUANT_H_
#define NFL_QUANT_H_

#include <cstdint>
#include <string_view>

namespace nfl::quant {

enum class Rounding : std::uint8_t {
  kStochastic,
  kNearest,
  kNearestEvenTieTowardZero,
};

// Describes a fixed-point register. Values live on an integer grid whose step
// is 2 when `even_only` is set (signed weights) and 1 otherwise.
struct QuantSpec {
  int bits = 8;
  bool is_signed = true;
  bool even_only = false;
  Rounding rounding = Rounding::kStochastic;

  // Signed even 8-bit synaptic weights: {-128, -126, ..., 126}.
  static constexpr QuantSpec Weight() {
    return QuantSpec{8, true, true, Rounding::kStochastic};
  }
  // Unsigned 7-bit trace registers: {0, ..., 127}.
  static constexpr QuantSpec Trace() {
    return QuantSpec{7, false, false, Rounding::kStochastic};
  }

  // Throws Error(kInvalidArgument) when the invariants are violated.
  void Validate() const;

  std::int64_t min_value() const;
  std::int64_t max_value() const;
  std::int64_t step() const { return even_only ? 2 : 1; }
  bool Contains(std::int64_t v) const;

  friend bool operator==(const QuantSpec&, const QuantSpec&) = default;
};

// Counter-based generator: draw n of stream (seed, stream_id) is a pure
// function of the triple, so sequences are reproducible on every platform.
// Copying an Rng forks it; advancing mutates only the copy that draws.
class Rng {
 public:
  constexpr Rng() = default;
  constexpr Rng(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_id_(stream_id) {}

  std::uint64_t NextU64();
  // Uniform in [0, 1) with 53 bits of resolution.
  double NextUniform();
  // Uniform integer in [0, bound), bound > 0.
  std::uint64_t NextBelow(std::uint64_t bound);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  std::uint64_t counter() const { return counter_; }

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_id_ = 0;
  std::uint64_t counter_ = 0;
};

// Stream id for a named component and index, so a single master seed fans out
// into independent per-client / per-purpose streams.
std::uint64_t DeriveStream(std::string_view component, std::uint64_t index = 0);

// Rounds `v` onto the grid of `spec`, choosing the upper neighbor with
// probability equal to the fractional distance from the lower one. Values
// outside the representable range saturate without consuming randomness.
std::int64_t StochasticRound(double v, const QuantSpec& spec, Rng& rng);

// Nearest even integer; exact ties go toward zero.
std::int64_t RoundNearestEvenInt(double v);

// Nearest even integer to numerator/denominator (denominator > 0) in exact
// integer arithmetic; exact ties go toward zero.
std::int64_t RoundNearestEvenRatio(std::int64_t numerator,
                                   std::int64_t denominator);

// Saturates into the representable set. Even-only specs drop the low bit
// toward zero.
std::int64_t ClampToSpec(std::int64_t v, const QuantSpec& spec);

}  // namespace nfl::quant

#endif  // NFL_QUANT_H_
