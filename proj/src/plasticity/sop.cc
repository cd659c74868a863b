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

#include "nfl/plasticity/sop.h"

#include <cmath>
#include <string>

#include "nfl/error.h"

namespace nfl::plasticity {

SopBindings SopBindings::FromState(const TraceState& trace,
                                   const ErrorUnit& unit) {
  SopBindings b;
  b.Bind(SopVariable::kX1, trace.x1)
      .Bind(SopVariable::kX2, trace.x2)
      .Bind(SopVariable::kErrorRegister, unit.error_register);
  return b;
}

std::int64_t EvaluateSop(const SopProgram& program,
                         const SopBindings& bindings) {
  std::int64_t sum = 0;
  for (const auto& term : program.terms) {
    std::int64_t product = term.scale;
    for (const auto& factor : term.factors) {
      if (factor.variable == SopVariable::kConstant) {
        product *= factor.constant;
        continue;
      }
      const auto value = bindings.Get(factor.variable);
      if (!value) {
        throw Error(ErrorCode::kUnboundReference,
                    "unbound sum-of-products variable " +
                        std::to_string(static_cast<int>(factor.variable)));
      }
      product *= *value;
    }
    sum += product;
  }
  return sum;
}

double EvaluateSopScaled(const SopProgram& program,
                         const SopBindings& bindings) {
  return std::ldexp(static_cast<double>(EvaluateSop(program, bindings)),
                    program.exponent);
}

SopProgram CompileSoelToSop(const PlasticityConfig& cfg, const ErrorUnit& unit) {
  SopProgram program;
  std::int64_t eta = 1;
  if (cfg.learning_rate_log2 >= 0) {
    eta = std::int64_t{1} << cfg.learning_rate_log2;
  } else {
    program.exponent = cfg.learning_rate_log2;
  }
  const SopFactor e{SopVariable::kErrorRegister};
  const SopFactor c{SopVariable::kConstant, unit.offset};
  const SopFactor x1{SopVariable::kX1};
  const SopFactor x2{SopVariable::kX2};
  program.terms = {
      {eta, {e, x2}},
      {-eta, {e, x1}},
      {-eta, {c, x2}},
      {eta, {c, x1}},
  };
  return program;
}

}  // namespace nfl::plasticity
