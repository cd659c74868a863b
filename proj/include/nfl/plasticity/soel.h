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

#ifndef NFL_PLASTICITY_SOEL_H_
#define NFL_PLASTICITY_SOEL_H_

#include <cstdint>

#include "nfl/quant.h"

namespace nfl::plasticity {

inline constexpr int kRegisterMax = 127;

// Two first-order pre-synaptic filters with decays 1 - 2^-alpha_shift. The
// slower one (x2) minus the faster one (x1) gives a second-order kernel.
struct TraceParams {
  int alpha1_shift = 2;
  int alpha2_shift = 4;
  int impulse1 = 16;
  int impulse2 = 16;

  void Validate() const;

  friend bool operator==(const TraceParams&, const TraceParams&) = default;
};

struct TraceState {
  int x1 = 0;
  int x2 = 0;

  friend bool operator==(const TraceState&, const TraceState&) = default;
};

// Decays each trace in exact arithmetic, stochastically rounds it to the
// 7-bit grid, then adds the impulse on a pre-synaptic spike (saturating).
TraceState UpdateTrace(const TraceState& state, const TraceParams& params,
                       bool pre_spike, quant::Rng& rng);

inline int PreKernel(const TraceState& state) { return state.x2 - state.x1; }

// Error-triggered post-synaptic unit. The error is written into a
// non-negative 7-bit register biased by `offset`.
struct ErrorUnit {
  int target = 0;       // desired spikes per window
  int window = 16;      // steps between evaluations
  int threshold = 1;    // |err| must exceed this to trigger
  int offset = 64;      // register bias
  int last_error = 0;
  int error_register = 64;
  bool triggered = false;

  friend bool operator==(const ErrorUnit&, const ErrorUnit&) = default;
};

ErrorUnit EvaluateError(ErrorUnit unit, int spike_count);

// Box surrogate derivative: 1 inside [u_min, u_max], inclusive.
struct BoxGate {
  std::int32_t u_min = -256;
  std::int32_t u_max = 256;

  friend bool operator==(const BoxGate&, const BoxGate&) = default;
};

int BoxGateValue(const BoxGate& gate, std::int32_t membrane,
                 bool enabled = true);

struct PlasticityConfig {
  // Learning rate is 2^learning_rate_log2.
  int learning_rate_log2 = 0;
  quant::QuantSpec weight_quant = quant::QuantSpec::Weight();
  bool box_enabled = true;
  BoxGate box;
  TraceParams trace;
  int window = 16;
  int threshold = 1;
  int offset = 64;
  // Spike-count targets per window for the labelled and the other outputs.
  int target_active = 8;
  int target_inactive = 0;

  void Validate() const;
  double learning_rate() const;
  ErrorUnit MakeErrorUnit(int target) const;

  friend bool operator==(const PlasticityConfig&,
                         const PlasticityConfig&) = default;
};

// Unrounded weight change eta * (E - C) * (x2 - x1) * gate, or 0 when the
// unit did not trigger.
double SoelDelta(const ErrorUnit& unit, const TraceState& trace, int gate_value,
                 const PlasticityConfig& cfg);

// Applies SoelDelta and stochastically rounds onto the weight grid. An
// untriggered unit leaves the weight untouched and consumes no randomness.
std::int64_t ApplySoelUpdate(std::int64_t weight, const ErrorUnit& unit,
                             const TraceState& trace, int gate_value,
                             const PlasticityConfig& cfg, quant::Rng& rng);

}  // namespace nfl::plasticity

#endif  // NFL_PLASTICITY_SOEL_H_
