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

#include "nfl/snn/neuron.h"

#include <algorithm>
#include <string>

#include "nfl/error.h"

namespace nfl::snn {

namespace {

std::int32_t Saturate(std::int64_t v) {
  return static_cast<std::int32_t>(
      std::clamp<std::int64_t>(v, kAccumulatorMin, kAccumulatorMax));
}

std::int64_t Decay(std::int64_t v, int shift) {
  return shift == 0 ? v : v - (v >> shift);
}

}  // namespace

void NeuronParams::Validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, "neuron params: " + what);
  };
  if (threshold <= 0) fail("threshold must be > 0");
  if (current_decay_shift < 0 || current_decay_shift > 12) {
    fail("current_decay_shift must be in [0, 12]");
  }
  if (voltage_decay_shift < 0 || voltage_decay_shift > 12) {
    fail("voltage_decay_shift must be in [0, 12]");
  }
  if (refractory_steps < 0) fail("refractory_steps must be >= 0");
}

NeuronState StepNeuron(const NeuronState& state, const NeuronParams& params,
                       std::int64_t input_sum) {
  NeuronState next;
  next.current =
      Saturate(Decay(state.current, params.current_decay_shift) + input_sum);
  if (state.refractory_remaining > 0) {
    next.voltage = 0;
    next.refractory_remaining = state.refractory_remaining - 1;
    next.spiked_last_step = false;
    return next;
  }
  next.voltage = Saturate(Decay(state.voltage, params.voltage_decay_shift) +
                          next.current);
  if (next.voltage >= params.threshold) {
    next.voltage = 0;
    next.refractory_remaining = params.refractory_steps;
    next.spiked_last_step = true;
  }
  return next;
}

}  // namespace nfl::snn
