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

#include "nfl/quant.h"

#include <cmath>
#include <string>

#include "nfl/error.h"

namespace nfl::quant {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t Mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::int64_t FloorToGrid(double v, std::int64_t step) {
  return static_cast<std::int64_t>(std::floor(v / static_cast<double>(step))) *
         step;
}

}  // namespace

void QuantSpec::Validate() const {
  if (bits < 1 || bits > 16) {
    throw Error(ErrorCode::kInvalidArgument,
                "quant spec bits must be in [1, 16], got " +
                    std::to_string(bits));
  }
  if (even_only && !is_signed) {
    throw Error(ErrorCode::kInvalidArgument,
                "even-only quant spec must be signed");
  }
  if (even_only && bits < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "even-only quant spec needs at least 2 bits");
  }
}

std::int64_t QuantSpec::min_value() const {
  return is_signed ? -(std::int64_t{1} << (bits - 1)) : 0;
}

std::int64_t QuantSpec::max_value() const {
  const std::int64_t top = is_signed ? (std::int64_t{1} << (bits - 1)) - 1
                                     : (std::int64_t{1} << bits) - 1;
  return even_only ? top - (top & 1) : top;
}

bool QuantSpec::Contains(std::int64_t v) const {
  return v >= min_value() && v <= max_value() && (!even_only || v % 2 == 0);
}

std::uint64_t Rng::NextU64() {
  const std::uint64_t key = Mix64(seed_ ^ Mix64(stream_id_ + kGolden));
  return Mix64(key + (++counter_) * kGolden);
}

double Rng::NextUniform() {
  return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::NextBelow(std::uint64_t bound) {
  if (bound == 0) {
    throw Error(ErrorCode::kInvalidArgument, "NextBelow bound must be > 0");
  }
  // Rejection sampling keeps the result unbiased.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t x = NextU64();
  while (x >= limit) x = NextU64();
  return x % bound;
}

std::uint64_t DeriveStream(std::string_view component, std::uint64_t index) {
  // FNV-1a over the name, then mixed with the index.
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : component) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return Mix64(h ^ Mix64(index));
}

std::int64_t StochasticRound(double v, const QuantSpec& spec, Rng& rng) {
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::kNonFinite, "non-finite input");
  }
  const auto lo = spec.min_value();
  const auto hi = spec.max_value();
  if (v <= static_cast<double>(lo)) return lo;
  if (v >= static_cast<double>(hi)) return hi;

  const std::int64_t step = spec.step();
  const std::int64_t below = FloorToGrid(v, step);
  const double frac =
      (v - static_cast<double>(below)) / static_cast<double>(step);
  return rng.NextUniform() < frac ? below + step : below;
}

std::int64_t RoundNearestEvenInt(double v) {
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::kNonFinite, "non-finite input");
  }
  const double half = v / 2.0;
  const double base = std::floor(half);
  const double rem = half - base;
  auto m = static_cast<std::int64_t>(base);
  if (rem > 0.5 || (rem == 0.5 && m < 0)) ++m;
  return 2 * m;
}

std::int64_t RoundNearestEvenRatio(std::int64_t numerator,
                                   std::int64_t denominator) {
  if (denominator <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "denominator must be positive");
  }
  const std::int64_t span = 2 * denominator;
  std::int64_t m = numerator / span;
  std::int64_t rem = numerator % span;
  if (rem < 0) {
    rem += span;
    --m;
  }
  // rem / span is the fractional part of numerator / span, in [0, 1).
  if (2 * rem > span || (2 * rem == span && m < 0)) ++m;
  return 2 * m;
}

std::int64_t ClampToSpec(std::int64_t v, const QuantSpec& spec) {
  const auto lo = spec.min_value();
  const auto hi = spec.max_value();
  if (v < lo) return lo;
  if (v > hi) return hi;
  if (spec.even_only) v -= v % 2;
  return v;
}

}  // namespace nfl::quant
