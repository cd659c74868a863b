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

#include "nfl/snn/weight_file.h"

#include <string>

#include "nfl/bytes.h"
#include "nfl/error.h"

namespace nfl::snn {

namespace {

constexpr std::string_view kMagic = "NFW1";

void PutShape(ByteWriter& w, const Shape3& s) {
  w.U16(static_cast<std::uint16_t>(s.height));
  w.U16(static_cast<std::uint16_t>(s.width));
  w.U16(static_cast<std::uint16_t>(s.channels));
}

Shape3 GetShape(ByteReader& r) {
  Shape3 s;
  s.height = r.U16();
  s.width = r.U16();
  s.channels = r.U16();
  return s;
}

// Reconstructs kernel geometry from the stored shapes and weight count.
LayerSpec InferSpec(LayerKind kind, const Shape3& in, const Shape3& out,
                    std::uint32_t weight_count) {
  LayerSpec spec;
  spec.kind = kind;
  spec.in_shape = in;
  spec.out_shape = out;
  switch (kind) {
    case LayerKind::kSumPool:
      if (out.height == 0) break;
      spec.kernel = in.height / out.height;
      spec.stride = spec.kernel;
      break;
    case LayerKind::kConv: {
      const std::uint64_t per = static_cast<std::uint64_t>(in.channels) *
                                static_cast<std::uint64_t>(out.channels);
      int k = 0;
      if (per != 0 && weight_count % per == 0) {
        const auto area = weight_count / per;
        while (static_cast<std::uint64_t>(k + 1) * (k + 1) <= area) ++k;
        if (static_cast<std::uint64_t>(k) * k != area) k = 0;
      }
      if (k == 0) {
        throw Error(ErrorCode::kShapeMismatch,
                    "conv weight count is not a square kernel");
      }
      spec.kernel = k;
      spec.zero_pad = out.height == in.height;
      break;
    }
    case LayerKind::kDense:
      break;
  }
  spec.Validate();
  if (spec.WeightCount() != weight_count) {
    throw Error(ErrorCode::kShapeMismatch,
                "weight count " + std::to_string(weight_count) +
                    " does not match layer shape");
  }
  return spec;
}

}  // namespace

std::vector<std::uint8_t> EncodeWeights(const Network& network) {
  ByteWriter w;
  w.Raw(kMagic);
  w.U16(kWeightFileVersion);
  w.U16(static_cast<std::uint16_t>(network.layer_count()));
  for (const auto& layer : network.layers()) {
    w.U8(static_cast<std::uint8_t>(layer.spec.kind));
    PutShape(w, layer.spec.in_shape);
    PutShape(w, layer.spec.out_shape);
    w.U32(static_cast<std::uint32_t>(layer.weights.size()));
    for (auto v : layer.weights) w.I8(v);
  }
  return w.Take();
}

std::vector<Layer> DecodeWeights(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (!r.Expect(kMagic)) {
    throw Error(ErrorCode::kBadMagic, "bad magic: not a weight file");
  }
  if (const auto version = r.U16(); version != kWeightFileVersion) {
    throw Error(ErrorCode::kBadVersion,
                "unsupported weight file version " + std::to_string(version));
  }
  const auto layer_count = r.U16();
  std::vector<Layer> layers;
  for (std::uint16_t i = 0; i < layer_count; ++i) {
    const auto kind_byte = r.U8();
    if (kind_byte > static_cast<std::uint8_t>(LayerKind::kDense)) {
      throw Error(ErrorCode::kShapeMismatch,
                  "unknown layer kind " + std::to_string(kind_byte));
    }
    const auto in = GetShape(r);
    const auto out = GetShape(r);
    const auto count = r.U32();
    Layer layer;
    layer.spec = InferSpec(static_cast<LayerKind>(kind_byte), in, out, count);
    const auto raw = r.Raw(count);
    layer.weights.reserve(count);
    for (auto b : raw) {
      const auto v = static_cast<std::int8_t>(b);
      if (v % 2 != 0) {
        throw Error(ErrorCode::kOddWeight,
                    "odd weight " + std::to_string(int{v}) + " in layer " +
                        std::to_string(i));
      }
      layer.weights.push_back(v);
    }
    layers.push_back(std::move(layer));
  }
  if (r.remaining() != 0) {
    throw Error(ErrorCode::kShapeMismatch, "trailing bytes after last layer");
  }
  return layers;
}

void SaveWeights(const std::filesystem::path& path, const Network& network) {
  WriteFileBytes(path, EncodeWeights(network));
}

Network LoadWeights(const std::filesystem::path& path,
                    const NetworkParams& params) {
  return Network::FromLayers(DecodeWeights(ReadFileBytes(path)), params);
}

void LoadWeightsInto(const std::filesystem::path& path, Network& network) {
  auto loaded = LoadWeights(path, network.params());
  if (loaded.layer_count() != network.layer_count()) {
    throw Error(ErrorCode::kShapeMismatch, "weight file has " +
                                               std::to_string(loaded.layer_count()) +
                                               " layers, network has " +
                                               std::to_string(network.layer_count()));
  }
  for (std::size_t i = 0; i < loaded.layer_count(); ++i) {
    if (loaded.layer(i).spec != network.layer(i).spec) {
      throw Error(ErrorCode::kShapeMismatch,
                  "layer " + std::to_string(i) + " shape differs from network");
    }
  }
  network = std::move(loaded);
}

}  // namespace nfl::snn
