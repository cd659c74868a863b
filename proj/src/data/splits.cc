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

#include "nfl/data/splits.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

#include "nfl/error.h"
#include "nfl/quant.h"

namespace nfl::data {

namespace {

void Shuffle(std::vector<std::size_t>& v, quant::Rng rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.NextBelow(i)]);
  }
}

[[noreturn]] void Insufficient(const std::string& what) {
  throw Error(ErrorCode::kInsufficientSamples, "insufficient samples: " + what);
}

// Takes `count` unused samples of `label` from `candidates` in order.
std::vector<std::size_t> Take(std::span<const SampleInfo> pool,
                              const std::vector<std::size_t>& candidates,
                              std::vector<bool>& used, int label, int count) {
  std::vector<std::size_t> out;
  for (auto idx : candidates) {
    if (static_cast<int>(out.size()) == count) break;
    if (!used[idx] && pool[idx].label == label) {
      used[idx] = true;
      out.push_back(idx);
    }
  }
  return out;
}

}  // namespace

Splits MakeSplits(std::span<const SampleInfo> pool, const SplitParams& params) {
  if (params.num_clients < 1 || params.shots_per_class < 1 ||
      params.test_size < 0 || params.novel_classes.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "bad split parameters");
  }
  const std::set<int> novel(params.novel_classes.begin(),
                            params.novel_classes.end());
  std::set<int> subjects;
  for (const auto& s : pool) {
    if (novel.count(s.label) && s.subject >= 0) subjects.insert(s.subject);
  }
  const bool by_subject = subjects.size() >= 2;

  std::set<int> test_subjects;
  if (by_subject) {
    auto n_test = static_cast<std::size_t>(
        std::lround(subjects.size() * params.test_subject_fraction));
    n_test = std::clamp<std::size_t>(n_test, 1, subjects.size() - 1);
    auto it = subjects.end();
    for (std::size_t i = 0; i < n_test; ++i) test_subjects.insert(*--it);
  }

  std::vector<std::size_t> train_candidates;
  std::vector<std::size_t> test_candidates;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (!novel.count(pool[i].label)) continue;
    if (!by_subject) {
      train_candidates.push_back(i);
      test_candidates.push_back(i);
    } else if (pool[i].subject < 0) {
      continue;
    } else if (test_subjects.count(pool[i].subject)) {
      test_candidates.push_back(i);
    } else {
      train_candidates.push_back(i);
    }
  }
  Shuffle(train_candidates,
          quant::Rng(params.seed, quant::DeriveStream("split-train")));
  Shuffle(test_candidates,
          quant::Rng(params.seed, quant::DeriveStream("split-test")));

  // One subject per client when possible.
  std::vector<int> client_subject(params.num_clients, -1);
  if (by_subject) {
    std::vector<std::size_t> train_subjects;
    for (int s : subjects) {
      if (!test_subjects.count(s)) train_subjects.push_back(s);
    }
    if (train_subjects.size() >= static_cast<std::size_t>(params.num_clients)) {
      Shuffle(train_subjects,
              quant::Rng(params.seed, quant::DeriveStream("split-subjects")));
      for (int k = 0; k < params.num_clients; ++k) {
        client_subject[k] = static_cast<int>(train_subjects[k]);
      }
    }
  }

  std::vector<bool> used(pool.size(), false);
  Splits splits;
  splits.shots.client_samples.resize(params.num_clients);
  for (int k = 0; k < params.num_clients; ++k) {
    std::vector<std::size_t> candidates;
    if (client_subject[k] >= 0) {
      for (auto idx : train_candidates) {
        if (pool[idx].subject == client_subject[k]) candidates.push_back(idx);
      }
    } else {
      candidates = train_candidates;
    }
    for (int label : params.novel_classes) {
      auto got = Take(pool, candidates, used, label, params.shots_per_class);
      if (static_cast<int>(got.size()) < params.shots_per_class) {
        Insufficient("client " + std::to_string(k) + " needs " +
                     std::to_string(params.shots_per_class) +
                     " shot(s) of class " + std::to_string(label));
      }
      auto& dst = splits.shots.client_samples[k];
      dst.insert(dst.end(), got.begin(), got.end());
    }
  }

  std::map<int, std::vector<std::size_t>> test_by_class;
  for (auto idx : test_candidates) {
    if (!used[idx]) test_by_class[pool[idx].label].push_back(idx);
  }
  std::map<int, std::size_t> cursor;
  while (static_cast<int>(splits.test.size()) < params.test_size) {
    bool progressed = false;
    for (int label : params.novel_classes) {
      if (static_cast<int>(splits.test.size()) == params.test_size) break;
      auto& bucket = test_by_class[label];
      auto& pos = cursor[label];
      if (pos < bucket.size()) {
        splits.test.push_back(bucket[pos++]);
        progressed = true;
      }
    }
    if (!progressed) {
      Insufficient("test set needs " + std::to_string(params.test_size) +
                   " samples, pool has " + std::to_string(splits.test.size()));
    }
  }
  return splits;
}

}  // namespace nfl::data
