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

// Piecewise convolutional sentence encoder.
#pragma once

#include <algorithm>
#include <span>
#include <utility>
#include <vector>

#include "see/model.hpp"
#include "see/numerics.hpp"

namespace see {

// K x (n - window + 1) sliding-window responses of `filters` (K x window*dim).
inline Tensor convolve(std::span<const Tensor> inputs, const Tensor& filters, std::size_t window) {
  Graph g;
  std::vector<Var> xs;
  for (const Tensor& x : inputs) xs.push_back(g.constant(x));
  return g.value(g.conv(g.constant(filters), xs, window));
}

// Per filter: maxima of columns [0, p1-1], [p1, p2], [p2+1, T-1], filter-major;
// empty segments give 0.
inline Tensor piecewise_max_pool(const Tensor& conv, std::size_t p1, std::size_t p2) {
  Graph g;
  return g.value(g.piecewise_max_pool(g.constant(conv), p1, p2));
}

// Entity positions ordered and clamped to valid conv-output columns.
inline std::pair<std::size_t, std::size_t> pooling_boundaries(int e1, int e2, std::size_t conv_len) {
  const int last = static_cast<int>(conv_len) - 1;
  const int a = std::clamp(std::min(e1, e2), 0, last);
  const int b = std::clamp(std::max(e1, e2), 0, last);
  return {static_cast<std::size_t>(a), static_cast<std::size_t>(b)};
}

// tanh(piecewise_max_pool(conv(X))) of length 3K. Sentences shorter than the
// window are right-padded with zero vectors.
inline Var sentence_embedding(Graph& g, const Model& m, const EncodedSentence& s) {
  const std::size_t window = static_cast<std::size_t>(m.config.window);
  std::vector<Var> xs;
  xs.reserve(std::max(s.size(), window));
  for (std::size_t i = 0; i < s.size(); ++i) xs.push_back(input_vector(g, m, s, i, InputMode::kPcnn));
  while (xs.size() < window) xs.push_back(g.constant(Tensor(m.pcnn_input_dim()), "pad"));
  const Var conv = g.conv(g.param("conv.filters"), xs, window);
  const auto [p1, p2] = pooling_boundaries(s.e1, s.e2, xs.size() - window + 1);
  return g.tanh(g.piecewise_max_pool(conv, p1, p2));
}

inline Tensor sentence_embedding(const Model& m, const ParsedSentence& s) {
  Graph g(m.params);
  return g.value(sentence_embedding(g, m, encode(m, s)));
}

}  // namespace see
