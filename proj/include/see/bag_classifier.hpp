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

// Bag-level relation classification: attention pooling over sentences and
// entity embeddings, the baseline / CAT / TRANS scoring heads, softmax and
// cross-entropy.
#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "see/attention.hpp"
#include "see/entity_encoder.hpp"
#include "see/model.hpp"
#include "see/numerics.hpp"
#include "see/sentence_encoder.hpp"

namespace see {

struct BagRepresentation {
  Pooled sentences;
  std::optional<Pooled> e1;
  std::optional<Pooled> e2;
};

inline BagRepresentation bag_representations(Graph& g, const Model& m, const EncodedBag& bag,
                                             bool with_entities) {
  std::vector<Var> sent, ent1, ent2;
  for (const EncodedSentence& s : bag.sentences) {
    sent.push_back(sentence_embedding(g, m, s));
    if (with_entities) {
      ent1.push_back(entity_context_embedding(g, m, s, s.e1));
      ent2.push_back(entity_context_embedding(g, m, s, s.e2));
    }
  }
  BagRepresentation rep{self_attention_pool(g, "att.sent", sent), std::nullopt, std::nullopt};
  if (with_entities) {
    rep.e1 = self_attention_pool(g, "att.e1", ent1);
    rep.e2 = self_attention_pool(g, "att.e2", ent2);
  }
  return rep;
}

// Dropout masks for the vectors feeding the affine heads; empty = no dropout.
struct HeadDropout {
  std::optional<Tensor> sentence;  // emb_S (baseline, TRANS) or the CAT concatenation
  std::optional<Tensor> difference;  // emb_e2 - emb_e1 (TRANS)
};

namespace detail {
inline Var masked(Graph& g, Var x, const std::optional<Tensor>& mask) {
  return mask ? g.mul(x, g.constant(*mask, "dropout")) : x;
}
}  // namespace detail

// o^s = W^s emb_S + b^s.
inline Var score_baseline(Graph& g, Var emb_s, const HeadDropout& drop = {}) {
  return g.affine(g.param("head.s.W"), detail::masked(g, emb_s, drop.sentence), g.param("head.s.b"));
}

// o^cat = W^cat [emb_S; emb_e1; emb_e2] + b^cat.
inline Var score_cat(Graph& g, Var emb_s, Var emb_e1, Var emb_e2, const HeadDropout& drop = {}) {
  const Var joined = g.concat({emb_s, emb_e1, emb_e2});
  return g.affine(g.param("head.cat.W"), detail::masked(g, joined, drop.sentence),
                  g.param("head.cat.b"));
}

// o^see = W^see (emb_e2 - emb_e1) + b^see;
// o^trans = α ∘ o^s + (1 - α) ∘ o^see with α = σ(head.alpha).
inline Var score_trans(Graph& g, Var emb_s, Var emb_e1, Var emb_e2, const HeadDropout& drop = {}) {
  const Var o_s = score_baseline(g, emb_s, drop);
  const Var diff = detail::masked(g, g.sub(emb_e2, emb_e1), drop.difference);
  const Var o_see = g.affine(g.param("head.see.W"), diff, g.param("head.see.b"));
  const Var alpha = g.sigmoid(g.param("head.alpha"));
  return g.add(g.mul(alpha, o_s), g.mul(g.one_minus(alpha), o_see));
}

inline std::vector<double> relation_probs(std::span<const double> scores) { return softmax(scores); }

struct ForwardOptions {
  double dropout_rate = 0.0;
  Rng* rng = nullptr;  // training mode iff set and dropout_rate > 0

  bool training() const { return rng != nullptr && dropout_rate > 0.0; }
};

struct BagForward {
  BagRepresentation rep;
  Var scores;
};

// Masks are drawn in a fixed order: sentence vector, then the TRANS
// difference.
inline BagForward forward_bag(Graph& g, const Model& m, const EncodedBag& bag, Strategy strategy,
                              const ForwardOptions& opt = {}) {
  BagForward f{bag_representations(g, m, bag, uses_entities(strategy)), {}};
  HeadDropout drop;
  const std::size_t ds = m.sentence_dim(), h = m.hidden();
  if (opt.training()) {
    const std::size_t first = strategy == Strategy::kCat ? ds + 2 * h : ds;
    drop.sentence = dropout_mask(first, opt.dropout_rate, *opt.rng);
    if (strategy == Strategy::kTrans) drop.difference = dropout_mask(h, opt.dropout_rate, *opt.rng);
  }
  const Var s = f.rep.sentences.vector;
  switch (strategy) {
    case Strategy::kBaseline:
      f.scores = score_baseline(g, s, drop);
      break;
    case Strategy::kCat:
      f.scores = score_cat(g, s, f.rep.e1->vector, f.rep.e2->vector, drop);
      break;
    case Strategy::kTrans:
      f.scores = score_trans(g, s, f.rep.e1->vector, f.rep.e2->vector, drop);
      break;
  }
  return f;
}

// p(r | S) for every relation, evaluation mode.
inline std::vector<double> predict_probs(const Model& m, const EncodedBag& bag, Strategy strategy) {
  Graph g(m.params);
  const BagForward f = forward_bag(g, m, bag, strategy);
  return relation_probs(g.value(f.scores).data());
}

inline std::vector<double> predict_probs(const Model& m, const EncodedBag& bag) {
  return predict_probs(m, bag, m.config.strategy);
}

// Mean over bags of -log p(r_i | S_i). With `accumulate`, gradients of that
// mean are added to m.params in bag order.
inline double bag_loss(std::span<const EncodedBag> batch, Model& m, Strategy strategy,
                       double dropout_rate, Rng* rng, bool accumulate) {
  if (batch.empty()) throw std::invalid_argument("bag_loss: empty batch");
  const double inv = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    Graph g(&m.params);
    const BagForward f = forward_bag(g, m, batch[i], strategy, {dropout_rate, rng});
    const Var loss = g.cross_entropy(f.scores, static_cast<std::size_t>(batch[i].relation_id));
    const double v = g.value(loss)[0];
    if (!std::isfinite(v)) throw NumericError("non-finite loss at bag " + std::to_string(i));
    if (accumulate) g.backward(loss, inv);
    total += v;
  }
  return total * inv;
}

}  // namespace see
