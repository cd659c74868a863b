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

#include "nfl/plasticity/soel.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "nfl/error.h"

namespace nfl::plasticity {

namespace {

[[noreturn]] void Invalid(const std::string& what) {
  throw Error(ErrorCode::kInvalidArgument, what);
}

int DecayAndRound(int x, int shift, quant::Rng& rng) {
  const double decayed = x - std::ldexp(static_cast<double>(x), -shift);
  return static_cast<int>(
      quant::StochasticRound(decayed, quant::QuantSpec::Trace(), rng));
}

}  // namespace

void TraceParams::Validate() const {
  if (alpha1_shift < 1 || alpha1_shift > 12 || alpha2_shift < 1 ||
      alpha2_shift > 12) {
    Invalid("trace alpha shifts must be in [1, 12]");
  }
  if (alpha1_shift == alpha2_shift) {
    Invalid("trace alpha shifts must differ");
  }
  if (impulse1 < 0 || impulse1 > kRegisterMax || impulse2 < 0 ||
      impulse2 > kRegisterMax) {
    Invalid("trace impulses must be in [0, 127]");
  }
}

TraceState UpdateTrace(const TraceState& state, const TraceParams& params,
                       bool pre_spike, quant::Rng& rng) {
  TraceState next;
  next.x1 = DecayAndRound(state.x1, params.alpha1_shift, rng);
  next.x2 = DecayAndRound(state.x2, params.alpha2_shift, rng);
  if (pre_spike) {
    next.x1 = std::min(next.x1 + params.impulse1, kRegisterMax);
    next.x2 = std::min(next.x2 + params.impulse2, kRegisterMax);
  }
  return next;
}

ErrorUnit EvaluateError(ErrorUnit unit, int spike_count) {
  unit.last_error = unit.target - spike_count;
  unit.triggered = unit.last_error > unit.threshold ||
                   unit.last_error < -unit.threshold;
  unit.error_register =
      unit.triggered
          ? std::clamp(unit.offset + unit.last_error, 0, kRegisterMax)
          : unit.offset;
  return unit;
}

int BoxGateValue(const BoxGate& gate, std::int32_t membrane, bool enabled) {
  if (!enabled) return 1;
  return membrane >= gate.u_min && membrane <= gate.u_max ? 1 : 0;
}

void PlasticityConfig::Validate() const {
  weight_quant.Validate();
  trace.Validate();
  if (learning_rate_log2 < -16 || learning_rate_log2 > 16) {
    Invalid("learning_rate must be a power of two in [2^-16, 2^16]");
  }
  if (box.u_min > box.u_max) Invalid("box u_min must be <= u_max");
  if (window < 1) Invalid("window must be >= 1");
  if (threshold < 0) Invalid("threshold must be >= 0");
  if (offset < 0 || offset > kRegisterMax) Invalid("offset must be in [0, 127]");
  if (target_active < 0 || target_inactive < 0 || target_active > window ||
      target_inactive > window) {
    Invalid("targets must be in [0, window]");
  }
}

double PlasticityConfig::learning_rate() const {
  return std::ldexp(1.0, learning_rate_log2);
}

ErrorUnit PlasticityConfig::MakeErrorUnit(int target) const {
  ErrorUnit unit;
  unit.target = target;
  unit.window = window;
  unit.threshold = threshold;
  unit.offset = offset;
  unit.error_register = offset;
  return unit;
}

double SoelDelta(const ErrorUnit& unit, const TraceState& trace, int gate_value,
                 const PlasticityConfig& cfg) {
  if (!unit.triggered) return 0.0;
  const auto product = static_cast<double>(unit.error_register - unit.offset) *
                       PreKernel(trace) * gate_value;
  return std::ldexp(product, cfg.learning_rate_log2);
}

std::int64_t ApplySoelUpdate(std::int64_t weight, const ErrorUnit& unit,
                             const TraceState& trace, int gate_value,
                             const PlasticityConfig& cfg, quant::Rng& rng) {
  if (!unit.triggered) return weight;
  const double target =
      static_cast<double>(weight) + SoelDelta(unit, trace, gate_value, cfg);
  return quant::StochasticRound(target, cfg.weight_quant, rng);
}

}  // namespace nfl::plasticity
