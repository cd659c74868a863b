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

#include "nfl/data/synthetic.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <tuple>
#include <vector>

#include "nfl/error.h"
#include "nfl/quant.h"

namespace nfl::data {

namespace {

constexpr std::uint32_t kSubstepUs = 2000;

struct Style {
  double speed = 1.0;
  double half_length = 7.0;
  double thickness = 2.5;
  double offset_x = 0.0;
  double offset_y = 0.0;
  double angle_bias = 0.0;  // radians
  double emit_prob = 0.85;
};

double Uniform(quant::Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * rng.NextUniform();
}

Style SubjectStyle(std::uint64_t style_seed, int subject) {
  Style s;
  if (subject < 0) return s;
  quant::Rng rng(style_seed, quant::DeriveStream(
                                 "subject-style",
                                 static_cast<std::uint64_t>(subject)));
  s.speed = Uniform(rng, 0.75, 1.25);
  s.half_length = Uniform(rng, 5.0, 9.0);
  s.thickness = Uniform(rng, 1.5, 3.0);
  s.offset_x = Uniform(rng, -3.0, 3.0);
  s.offset_y = Uniform(rng, -3.0, 3.0);
  s.angle_bias = Uniform(rng, -12.0, 12.0) * std::numbers::pi / 180.0;
  s.emit_prob = Uniform(rng, 0.6, 0.95);
  return s;
}

}  // namespace

std::string_view SyntheticClassName(int label) {
  static constexpr std::string_view kNames[kNumSyntheticClasses] = {
      "drift-right", "drift-up-right", "drift-up",   "drift-up-left",
      "drift-left",  "drift-down-left", "drift-down", "drift-down-right",
      "rotate-cw",   "rotate-ccw"};
  if (label < 0 || label >= kNumSyntheticClasses) return "unknown";
  return kNames[label];
}

GestureSample GenerateSynthetic(int label, std::uint64_t seed,
                                const SyntheticOptions& options) {
  if (label < 0 || label >= kNumSyntheticClasses) {
    throw Error(ErrorCode::kInvalidArgument,
                "synthetic class " + std::to_string(label) + " out of range");
  }
  if (options.width <= 0 || options.height <= 0 || options.duration_us == 0 ||
      !(options.noise_rate_hz >= 0.0) || !(options.texture_rate_hz >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "bad synthetic options");
  }

  GestureSample sample;
  sample.width = options.width;
  sample.height = options.height;
  sample.label = label;
  sample.subject = options.subject;
  sample.duration_us = options.duration_us;

  Style style = SubjectStyle(options.style_seed, options.subject);
  quant::Rng rng(seed, quant::DeriveStream("synthetic",
                                           static_cast<std::uint64_t>(label)));
  style.offset_x += Uniform(rng, -1.5, 1.5);
  style.offset_y += Uniform(rng, -1.5, 1.5);
  style.angle_bias += Uniform(rng, -5.0, 5.0) * std::numbers::pi / 180.0;
  style.speed *= Uniform(rng, 0.9, 1.1);

  const int w = options.width;
  const int h = options.height;
  const double size = std::min(w, h);
  const double cx = w / 2.0 + style.offset_x;
  const double cy = h / 2.0 + style.offset_y;
  const double duration = options.duration_us;
  const bool rotation = label >= 8;

  // Screen coordinates: x grows right, y grows down.
  const double heading = label * std::numbers::pi / 4.0 + style.angle_bias;
  const double dir_x = std::cos(heading);
  const double dir_y = -std::sin(heading);
  const double sweep_rate = 0.45 * size * style.speed / duration;
  const double spin_sign = label == 8 ? 1.0 : -1.0;
  const double spin_rate =
      spin_sign * 1.5 * std::numbers::pi * style.speed / duration;
  const double radius = 0.38 * size;
  const double half_thick = style.thickness / 2.0;

  auto covered = [&](int x, int y, double t) {
    const double rx = x + 0.5 - cx;
    const double ry = y + 0.5 - cy;
    if (rotation) {
      const double angle = heading + spin_rate * t;
      const double ux = std::cos(angle);
      const double uy = std::sin(angle);
      return std::abs(rx * ux + ry * uy) <= radius &&
             std::abs(-rx * uy + ry * ux) <= half_thick;
    }
    const double along = rx * dir_x + ry * dir_y;
    const double across = -rx * dir_y + ry * dir_x;
    return std::abs(along - sweep_rate * t) <= half_thick &&
           std::abs(across) <= style.half_length;
  };

  const double texture_prob =
      std::min(1.0, options.texture_rate_hz * kSubstepUs * 1e-6);
  std::vector<std::uint8_t> previous(static_cast<std::size_t>(w) * h, 0);
  for (std::uint32_t t = 0; t < options.duration_us; t += kSubstepUs) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        auto& was = previous[static_cast<std::size_t>(y) * w + x];
        const bool now = covered(x, y, t);
        if (now && now == static_cast<bool>(was)) {
          if (rng.NextUniform() < texture_prob) {
            sample.events.push_back(
                {static_cast<std::uint32_t>(std::min<std::uint64_t>(
                     t + rng.NextBelow(kSubstepUs), options.duration_us - 1)),
                 static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y),
                 static_cast<std::uint8_t>(rng.NextBelow(2))});
          }
          continue;
        }
        if (now == static_cast<bool>(was)) continue;
        was = now;
        if (rng.NextUniform() >= style.emit_prob) continue;
        const auto ts = std::min<std::uint64_t>(
            t + rng.NextBelow(kSubstepUs), options.duration_us - 1);
        sample.events.push_back({static_cast<std::uint32_t>(ts),
                                 static_cast<std::uint16_t>(x),
                                 static_cast<std::uint16_t>(y),
                                 static_cast<std::uint8_t>(now ? 1 : 0)});
      }
    }
  }

  const double total_rate = options.noise_rate_hz * w * h;  // events / s
  if (total_rate > 0.0) {
    double t = 0.0;
    while (true) {
      t += -std::log1p(-rng.NextUniform()) / total_rate * 1e6;
      if (t >= duration) break;
      sample.events.push_back(
          {static_cast<std::uint32_t>(t),
           static_cast<std::uint16_t>(rng.NextBelow(static_cast<std::uint64_t>(w))),
           static_cast<std::uint16_t>(rng.NextBelow(static_cast<std::uint64_t>(h))),
           static_cast<std::uint8_t>(rng.NextBelow(2))});
    }
  }

  std::sort(sample.events.begin(), sample.events.end(),
            [](const EventRecord& a, const EventRecord& b) {
              return std::tie(a.timestamp_us, a.y, a.x, a.polarity) <
                     std::tie(b.timestamp_us, b.y, b.x, b.polarity);
            });
  return sample;
}

}  // namespace nfl::data
