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

#ifndef NFL_PLASTICITY_SOP_H_
#define NFL_PLASTICITY_SOP_H_

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "nfl/plasticity/soel.h"

namespace nfl::plasticity {

// State variables a sum-of-products factor may read.
enum class SopVariable : std::uint8_t {
  kX1,
  kX2,
  kErrorRegister,
  kConstant,
  kPreSpike,
  kPostSpike,
};

struct SopFactor {
  SopVariable variable = SopVariable::kConstant;
  std::int64_t constant = 0;  // read only for kConstant

  friend bool operator==(const SopFactor&, const SopFactor&) = default;
};

struct SopTerm {
  std::int64_t scale = 1;
  std::vector<SopFactor> factors;  // empty product == 1

  friend bool operator==(const SopTerm&, const SopTerm&) = default;
};

// Weight change = 2^exponent * sum_k scale_k * prod_l factor_kl.
struct SopProgram {
  std::vector<SopTerm> terms;
  int exponent = 0;
};

class SopBindings {
 public:
  SopBindings& Bind(SopVariable v, std::int64_t value) {
    values_[static_cast<std::size_t>(v)] = value;
    return *this;
  }
  std::optional<std::int64_t> Get(SopVariable v) const {
    return values_[static_cast<std::size_t>(v)];
  }

  static SopBindings FromState(const TraceState& trace, const ErrorUnit& unit);

 private:
  std::array<std::optional<std::int64_t>, 6> values_{};
};

// Integer sum of products, before the program exponent. Throws
// Error(kUnboundReference) if a factor reads an unbound variable.
std::int64_t EvaluateSop(const SopProgram& program,
                         const SopBindings& bindings);
// EvaluateSop scaled by 2^exponent.
double EvaluateSopScaled(const SopProgram& program,
                         const SopBindings& bindings);

// Expands eta * (E - C) * (x2 - x1) into
//   eta*E*x2 - eta*E*x1 - eta*C*x2 + eta*C*x1.
SopProgram CompileSoelToSop(const PlasticityConfig& cfg, const ErrorUnit& unit);

}  // namespace nfl::plasticity

#endif  // NFL_PLASTICITY_SOP_H_
