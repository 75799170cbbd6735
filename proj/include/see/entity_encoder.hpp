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

// Syntax-aware entity encoder: a bottom-up tree-GRU over the dependency
// subtree rooted at an entity token, with attention over child states.
#pragma once

#include <span>
#include <vector>

#include "see/attention.hpp"
#include "see/model.hpp"
#include "see/numerics.hpp"

namespace see {

// Attention-weighted sum of child hidden vectors (parameters gru.att.*).
inline Pooled child_attention(Graph& g, std::span<const Var> child_hiddens) {
  return self_attention_pool(g, "gru.att", child_hiddens);
}

// One GRU node:
//   z = σ(Wz x + Uz h_ch + bz)
//   r = σ(Wr x + Ur h_ch + br)
//   h~ = tanh(Wh x + Uh (r ∘ h_ch) + bh)
//   h = z ∘ h_ch + (1 - z) ∘ h~
inline Var tree_gru_node(Graph& g, Var x, Var h_children) {
  auto gate = [&](const char* w, const char* u, const char* b, Var h) {
    return g.add(g.affine(g.param(w), x, g.param(b)), g.matvec(g.param(u), h));
  };
  const Var z = g.sigmoid(gate("gru.Wz", "gru.Uz", "gru.bz", h_children));
  const Var r = g.sigmoid(gate("gru.Wr", "gru.Ur", "gru.br", h_children));
  const Var cand = g.tanh(gate("gru.Wh", "gru.Uh", "gru.bh", g.mul(r, h_children)));
  return g.add(g.mul(z, h_children), g.mul(g.one_minus(z), cand));
}

// Hidden vector at `entity` after a post-order pass over its subtree. Leaves
// see a zero child vector. Tokens outside the subtree are never touched.
inline Var entity_context_embedding(Graph& g, const Model& m, const EncodedSentence& s,
                                    int entity) {
  const std::size_t h = m.hidden();
  std::vector<Var> hidden(s.size());
  // Iterative post-order: a node is expanded once, then finished after all
  // of its children.
  std::vector<std::pair<int, bool>> stack = {{entity, false}};
  while (!stack.empty()) {
    auto [node, expanded] = stack.back();
    stack.pop_back();
    const auto& kids = s.children[static_cast<std::size_t>(node)];
    if (!expanded) {
      stack.push_back({node, true});
      for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back({*it, false});
      continue;
    }
    Var h_ch;
    if (kids.empty()) {
      h_ch = g.constant(Tensor(h), "leaf");
    } else {
      std::vector<Var> states;
      states.reserve(kids.size());
      for (int c : kids) states.push_back(hidden[static_cast<std::size_t>(c)]);
      h_ch = child_attention(g, states).vector;
    }
    const Var x = input_vector(g, m, s, static_cast<std::size_t>(node), InputMode::kTree);
    hidden[static_cast<std::size_t>(node)] = tree_gru_node(g, x, h_ch);
  }
  return hidden[static_cast<std::size_t>(entity)];
}

inline Tensor entity_context_embedding(const Model& m, const ParsedSentence& s, int entity) {
  Graph g(m.params);
  return g.value(entity_context_embedding(g, m, encode(m, s), entity));
}

}  // namespace see
