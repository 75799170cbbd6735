// Copyright 2026 The SEE Relation Extraction Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Self-attention pooling: score_i = v · tanh(W x_i), weights = softmax(score),
// output = Σ weight_i x_i. Shared by the child, sentence and entity
// attentions, each with its own parameter prefix.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "see/numerics.hpp"

namespace see {

struct Pooled {
  Var vector;
  Var weights;
};

inline Pooled self_attention_pool(Graph& g, const std::string& prefix, std::span<const Var> items) {
  if (items.empty()) throw std::invalid_argument("self_attention_pool: empty input (" + prefix + ")");
  const Var w = g.param(prefix + ".W");
  const Var v = g.param(prefix + ".v");
  std::vector<Var> scores;
  scores.reserve(items.size());
  for (Var x : items) scores.push_back(g.dot(v, g.tanh(g.matvec(w, x))));
  const Var weights = g.softmax(g.concat(scores));
  return {g.weighted_sum(weights, items), weights};
}

}  // namespace see
