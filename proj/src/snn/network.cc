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

#include "nfl/snn/network.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include "nfl/error.h"
#include "nfl/quant.h"

namespace nfl::snn {

namespace {

[[noreturn]] void ShapeError(const std::string& what) {
  throw Error(ErrorCode::kShapeMismatch, what);
}

int ParseInt(std::string_view text, std::string_view token) {
  int value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || value <= 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "bad layer token '" + std::string(token) + "'");
  }
  return value;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

std::string Shape3::ToString() const {
  std::ostringstream out;
  out << height << "x" << width << "x" << channels;
  return out.str();
}

std::size_t LayerSpec::WeightCount() const {
  switch (kind) {
    case LayerKind::kSumPool:
      return 0;
    case LayerKind::kConv:
      return static_cast<std::size_t>(kernel) * kernel * in_shape.channels *
             out_shape.channels;
    case LayerKind::kDense:
      return in_shape.size() * out_shape.size();
  }
  return 0;
}

void LayerSpec::Validate() const {
  if (in_shape.size() == 0 || out_shape.size() == 0) {
    ShapeError("layer shapes must be non-empty");
  }
  switch (kind) {
    case LayerKind::kSumPool: {
      if (kernel < 1 || stride != kernel || zero_pad) {
        ShapeError("pool layer needs kernel >= 1, stride == kernel, no pad");
      }
      const Shape3 expect{in_shape.height / kernel, in_shape.width / kernel,
                          in_shape.channels};
      if (in_shape.height % kernel != 0 || in_shape.width % kernel != 0 ||
          out_shape != expect) {
        ShapeError("pool " + std::to_string(kernel) + "a maps " +
                   in_shape.ToString() + " to " + expect.ToString() +
                   ", not " + out_shape.ToString());
      }
      break;
    }
    case LayerKind::kConv: {
      if (kernel < 1 || stride != 1) {
        ShapeError("conv layer needs kernel >= 1 and stride 1");
      }
      if (zero_pad && kernel % 2 == 0) {
        ShapeError("zero-padded conv needs an odd kernel");
      }
      const int shrink = zero_pad ? 0 : kernel - 1;
      if (out_shape.height != in_shape.height - shrink ||
          out_shape.width != in_shape.width - shrink) {
        ShapeError("conv spatial shape " + in_shape.ToString() + " -> " +
                   out_shape.ToString() + " inconsistent with kernel " +
                   std::to_string(kernel));
      }
      break;
    }
    case LayerKind::kDense:
      if (kernel != 1 || stride != 1 || zero_pad) {
        ShapeError("dense layer takes no kernel/stride/padding");
      }
      break;
  }
}

void Architecture::Validate() const {
  if (layers.empty()) ShapeError("architecture has no layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    layers[i].Validate();
    if (i > 0 && layers[i].in_shape != layers[i - 1].out_shape) {
      ShapeError("layer " + std::to_string(i) + " expects input " +
                 layers[i].in_shape.ToString() + " but layer " +
                 std::to_string(i - 1) + " produces " +
                 layers[i - 1].out_shape.ToString());
    }
  }
  if (layers.back().kind != LayerKind::kDense) {
    ShapeError("the plastic output layer must be dense");
  }
}

Architecture ParseArchitecture(const Shape3& input, std::string_view notation) {
  Architecture arch;
  Shape3 shape = input;
  std::size_t start = 0;
  while (start <= notation.size()) {
    auto comma = notation.find(',', start);
    if (comma == std::string_view::npos) comma = notation.size();
    const auto token = Trim(notation.substr(start, comma - start));
    start = comma + 1;
    if (token.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "empty layer token");
    }

    LayerSpec spec;
    spec.in_shape = shape;
    if (token.back() == 'a') {
      spec.kind = LayerKind::kSumPool;
      spec.kernel = ParseInt(token.substr(0, token.size() - 1), token);
      spec.stride = spec.kernel;
      spec.out_shape = {shape.height / spec.kernel, shape.width / spec.kernel,
                        shape.channels};
    } else if (auto c = token.find('c'); c != std::string_view::npos) {
      spec.kind = LayerKind::kConv;
      auto rest = token.substr(c + 1);
      spec.zero_pad = !rest.empty() && rest.back() == 'z';
      if (spec.zero_pad) rest.remove_suffix(1);
      const int filters = ParseInt(token.substr(0, c), token);
      spec.kernel = ParseInt(rest, token);
      // A 1x1 kernel is identical with or without padding.
      if (spec.kernel == 1) spec.zero_pad = true;
      const int shrink = spec.zero_pad ? 0 : spec.kernel - 1;
      spec.out_shape = {shape.height - shrink, shape.width - shrink, filters};
    } else {
      spec.kind = LayerKind::kDense;
      spec.out_shape = {1, 1, ParseInt(token, token)};
    }
    spec.Validate();
    arch.layers.push_back(spec);
    shape = spec.out_shape;
    if (comma == notation.size()) break;
  }
  arch.Validate();
  return arch;
}

Architecture TableOneArchitecture(int num_classes) {
  return ParseArchitecture({128, 128, 2}, "4a,16c5z,2a,32c3z,2a,512," +
                                              std::to_string(num_classes));
}

void NetworkParams::Validate() const {
  hidden.Validate();
  output.Validate();
}

Network Network::Build(const Architecture& arch, const NetworkParams& params,
                       const HiddenInit& init) {
  arch.Validate();
  params.Validate();
  const auto lo = quant::ClampToSpec(init.min_weight + (init.min_weight & 1),
                                     quant::QuantSpec::Weight());
  const auto hi = quant::ClampToSpec(init.max_weight - (init.max_weight & 1),
                                     quant::QuantSpec::Weight());
  if (lo > hi || init.density < 0.0 || init.density > 1.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "hidden init needs min <= max and density in [0, 1]");
  }
  const auto levels = static_cast<std::uint64_t>((hi - lo) / 2 + 1);

  std::vector<Layer> layers;
  layers.reserve(arch.layers.size());
  for (std::size_t i = 0; i < arch.layers.size(); ++i) {
    Layer layer{arch.layers[i], std::vector<std::int8_t>(
                                    arch.layers[i].WeightCount(), 0)};
    const bool plastic = i + 1 == arch.layers.size();
    if (!plastic) {
      quant::Rng rng(init.seed, quant::DeriveStream("hidden-init", i));
      for (auto& w : layer.weights) {
        if (rng.NextUniform() < init.density) {
          w = static_cast<std::int8_t>(
              lo + 2 * static_cast<std::int64_t>(rng.NextBelow(levels)));
        }
      }
    }
    layers.push_back(std::move(layer));
  }
  return Network(std::move(layers), params);
}

Network Network::FromLayers(std::vector<Layer> layers,
                            const NetworkParams& params) {
  Architecture arch;
  for (const auto& layer : layers) {
    arch.layers.push_back(layer.spec);
    if (layer.weights.size() != layer.spec.WeightCount()) {
      ShapeError("layer weight count " + std::to_string(layer.weights.size()) +
                 " does not match its shape (" +
                 std::to_string(layer.spec.WeightCount()) + ")");
    }
    for (auto w : layer.weights) {
      if (w % 2 != 0) {
        throw Error(ErrorCode::kOddWeight,
                    "odd weight " + std::to_string(int{w}));
      }
    }
  }
  arch.Validate();
  params.Validate();
  return Network(std::move(layers), params);
}

Architecture Network::architecture() const {
  Architecture arch;
  for (const auto& layer : layers_) arch.layers.push_back(layer.spec);
  return arch;
}

void Network::SetOutputWeights(std::span<const std::int8_t> weights) {
  auto& out = layers_.back().weights;
  if (weights.size() != out.size()) {
    ShapeError("output weights have " + std::to_string(weights.size()) +
               " entries, expected " + std::to_string(out.size()));
  }
  for (auto w : weights) {
    if (!quant::QuantSpec::Weight().Contains(w)) {
      throw Error(ErrorCode::kOddWeight,
                  "odd weight " + std::to_string(int{w}));
    }
  }
  std::copy(weights.begin(), weights.end(), out.begin());
}

void SpikeFrames::Add(std::size_t step, std::uint32_t index) {
  if (step >= active_.size() || index >= shape_.size()) {
    throw Error(ErrorCode::kOutOfBounds, "spike outside frame tensor");
  }
  active_[step].push_back(index);
}

void SpikeFrames::Finalize() {
  for (auto& step : active_) {
    std::sort(step.begin(), step.end());
    step.erase(std::unique(step.begin(), step.end()), step.end());
  }
}

std::size_t SpikeFrames::TotalSpikes() const {
  std::size_t total = 0;
  for (const auto& step : active_) total += step.size();
  return total;
}

void SpikeCounter::Record(std::span<const std::uint32_t> spikes) {
  for (auto i : spikes) ++counts[i];
}

void SpikeCounter::Reset(std::size_t step) {
  std::fill(counts.begin(), counts.end(), 0);
  window_start = step;
}

NetworkRunner::NetworkRunner(const Network& network) : network_(&network) {
  for (const auto& layer : network.layers()) {
    const auto n = layer.spec.out_shape.size();
    states_.emplace_back(n);
    drive_.emplace_back(n, 0);
    spikes_.emplace_back();
  }
}

void NetworkRunner::Reset() {
  input_spikes_.clear();
  for (std::size_t i = 0; i < states_.size(); ++i) {
    std::fill(states_[i].begin(), states_[i].end(), NeuronState{});
    std::fill(drive_[i].begin(), drive_[i].end(), 0);
    spikes_[i].clear();
  }
}

void NetworkRunner::Step(std::span<const std::uint32_t> active_inputs) {
  input_spikes_.assign(active_inputs.begin(), active_inputs.end());
  std::span<const std::uint32_t> in = input_spikes_;
  for (std::size_t i = 0; i < states_.size(); ++i) {
    Propagate(i, in);
    in = spikes_[i];
  }
}

std::span<const std::uint32_t> NetworkRunner::PlasticInputSpikes() const {
  return spikes_.size() == 1 ? std::span<const std::uint32_t>(input_spikes_)
                             : std::span<const std::uint32_t>(
                                   spikes_[spikes_.size() - 2]);
}

void NetworkRunner::Propagate(std::size_t index,
                              std::span<const std::uint32_t> in) {
  const Layer& layer = network_->layer(index);
  const LayerSpec& spec = layer.spec;
  const Shape3& is = spec.in_shape;
  const Shape3& os = spec.out_shape;
  auto& drive = drive_[index];
  std::fill(drive.begin(), drive.end(), 0);

  switch (spec.kind) {
    case LayerKind::kSumPool: {
      const auto gain = network_->params().pool_weight;
      for (auto idx : in) {
        const int c = static_cast<int>(idx % is.channels);
        const auto xy = idx / is.channels;
        const int x = static_cast<int>(xy % is.width);
        const int y = static_cast<int>(xy / is.width);
        drive[os.Index(y / spec.kernel, x / spec.kernel, c)] += gain;
      }
      break;
    }
    case LayerKind::kConv: {
      const int k = spec.kernel;
      const int pad = spec.zero_pad ? k / 2 : 0;
      const int cout = os.channels;
      for (auto idx : in) {
        const int ci = static_cast<int>(idx % is.channels);
        const auto xy = idx / is.channels;
        const int x = static_cast<int>(xy % is.width);
        const int y = static_cast<int>(xy / is.width);
        for (int ky = 0; ky < k; ++ky) {
          const int oy = y - ky + pad;
          if (oy < 0 || oy >= os.height) continue;
          for (int kx = 0; kx < k; ++kx) {
            const int ox = x - kx + pad;
            if (ox < 0 || ox >= os.width) continue;
            const std::int8_t* w =
                &layer.weights[((static_cast<std::size_t>(ky) * k + kx) *
                                    is.channels +
                                ci) *
                               cout];
            std::int64_t* d = &drive[os.Index(oy, ox, 0)];
            for (int co = 0; co < cout; ++co) d[co] += w[co];
          }
        }
      }
      break;
    }
    case LayerKind::kDense: {
      const std::size_t n = os.size();
      for (auto idx : in) {
        const std::int8_t* w = &layer.weights[idx * n];
        for (std::size_t o = 0; o < n; ++o) drive[o] += w[o];
      }
      break;
    }
  }

  const bool is_output = index + 1 == states_.size();
  const NeuronParams& params =
      is_output ? network_->params().output : network_->params().hidden;
  auto& states = states_[index];
  auto& spikes = spikes_[index];
  spikes.clear();
  for (std::size_t n = 0; n < states.size(); ++n) {
    states[n] = StepNeuron(states[n], params, drive[n]);
    if (states[n].spiked_last_step) {
      spikes.push_back(static_cast<std::uint32_t>(n));
    }
  }
}

SpikeCounter ForwardWindow(const Network& network, const SpikeFrames& frames) {
  if (frames.shape() != network.input_shape()) {
    ShapeError("frame shape " + frames.shape().ToString() +
               " does not match network input " +
               network.input_shape().ToString());
  }
  NetworkRunner runner(network);
  SpikeCounter counter(network.num_outputs());
  for (std::size_t t = 0; t < frames.num_steps(); ++t) {
    runner.Step(frames.Active(t));
    counter.Record(runner.OutputSpikes());
  }
  return counter;
}

std::size_t Classify(const SpikeCounter& counter) {
  if (counter.counts.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "classify needs >= 1 neuron");
  }
  return static_cast<std::size_t>(
      std::max_element(counter.counts.begin(), counter.counts.end()) -
      counter.counts.begin());
}

}  // namespace nfl::snn
