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

#ifndef NFL_SNN_NEURON_H_
#define NFL_SNN_NEURON_H_

#include <cstdint>

namespace nfl::snn {

// Current-based leaky integrate-and-fire with shift decay: each step the
// current loses I >> current_decay_shift and the voltage U >> voltage_decay_shift.
// A shift of 0 disables that decay.
struct NeuronParams {
  int current_decay_shift = 0;
  int voltage_decay_shift = 0;
  std::int32_t threshold = 256;
  int refractory_steps = 0;

  void Validate() const;

  friend bool operator==(const NeuronParams&, const NeuronParams&) = default;
};

struct NeuronState {
  std::int32_t current = 0;
  std::int32_t voltage = 0;
  int refractory_remaining = 0;
  bool spiked_last_step = false;

  friend bool operator==(const NeuronState&, const NeuronState&) = default;
};

// Internal accumulators saturate at signed 24 bits.
inline constexpr std::int32_t kAccumulatorMax = (1 << 23) - 1;
inline constexpr std::int32_t kAccumulatorMin = -(1 << 23);

NeuronState StepNeuron(const NeuronState& state, const NeuronParams& params,
                       std::int64_t input_sum);

}  // namespace nfl::snn

#endif  // NFL_SNN_NEURON_H_
