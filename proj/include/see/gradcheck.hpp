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

// Central finite-difference checks of every differentiable composite on toy
// dimensions.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "see/attention.hpp"
#include "see/bag_classifier.hpp"
#include "see/corpus.hpp"
#include "see/entity_encoder.hpp"
#include "see/model.hpp"
#include "see/numerics.hpp"
#include "see/sentence_encoder.hpp"

namespace see {

inline constexpr double kGradcheckStep = 1e-6;
// Denominator floor: central differences at h = 1e-6 carry ~1e-10 of
// round-off, so smaller gradients are compared absolutely.
inline constexpr double kGradcheckFloor = 1e-5;

inline double relative_error(double analytic, double numeric, double floor = kGradcheckFloor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

struct GradcheckResult {
  std::string composite;
  double max_rel_error = 0.0;
  std::string worst;  // "param[index]"
  std::size_t coordinates = 0;
};

// `value` evaluates the objective from the current store; `accumulate` adds
// its analytic gradient into store grads. Only parameters whose name starts
// with one of `prefixes` are perturbed (all when empty).
inline GradcheckResult compare_gradients(const std::string& composite, ParamStore& store,
                                         const std::function<double()>& value,
                                         const std::function<void()>& accumulate,
                                         const std::vector<std::string>& prefixes = {},
                                         double h = kGradcheckStep) {
  store.zero_grad();
  accumulate();
  GradcheckResult out{composite, 0.0, {}, 0};
  for (auto& [name, p] : store) {
    const bool wanted = prefixes.empty() || std::any_of(prefixes.begin(), prefixes.end(), [&](const auto& pre) {
                          return name.compare(0, pre.size(), pre) == 0;
                        });
    if (!wanted) continue;
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double saved = p.value[k];
      p.value[k] = saved + h;
      const double up = value();
      p.value[k] = saved - h;
      const double down = value();
      p.value[k] = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw NumericError("gradcheck " + composite + ": non-finite objective at " + name + "[" +
                           std::to_string(k) + "]");
      }
      const double err = relative_error(p.grad[k], (up - down) / (2.0 * h));
      ++out.coordinates;
      if (out.worst.empty() || err > out.max_rel_error) {
        out.max_rel_error = err;
        out.worst = name + "[" + std::to_string(k) + "]";
      }
    }
  }
  store.zero_grad();
  return out;
}

// Graph composite: `build` returns a scalar.
inline GradcheckResult check_graph(const std::string& composite, ParamStore& store,
                                   const std::function<Var(Graph&)>& build,
                                   const std::vector<std::string>& prefixes = {}) {
  auto value = [&] {
    Graph g(std::as_const(store));
    return g.value(build(g))[0];
  };
  auto accumulate = [&] {
    Graph g(&store);
    g.backward(build(g));
  };
  return compare_gradients(composite, store, value, accumulate, prefixes);
}

// ---------------------------------------------------------------------------
// Toy fixtures

inline TrainConfig toy_config(Strategy strategy, std::uint64_t seed) {
  TrainConfig c;
  c.d_word = 3;
  c.d_dep = 2;
  c.d_pos = 2;
  c.window = 3;
  c.filters = 3;
  c.hidden = 3;
  c.position_clip = 4;
  c.strategy = strategy;
  c.seed = seed;
  c.word_min_count = 1;
  c.dep_min_count = 1;
  return c;
}

// Uniformly random rooted tree over n tokens.
inline std::vector<int> random_tree(std::size_t n, Rng& rng) {
  std::vector<int> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
  shuffle_in_place(std::span(order), rng);
  std::vector<int> heads(n, -1);
  for (std::size_t k = 1; k < n; ++k) heads[static_cast<std::size_t>(order[k])] = order[uniform_index(rng, k)];
  return heads;
}

inline ParsedSentence toy_sentence(const std::string& e1, const std::string& e2, std::size_t min_len,
                                   std::size_t max_len, std::size_t n_words, Rng& rng) {
  ParsedSentence s;
  const std::size_t n = min_len + uniform_index(rng, max_len - min_len + 1);
  for (std::size_t i = 0; i < n; ++i) s.tokens.push_back("t" + std::to_string(uniform_index(rng, n_words)));
  s.heads = random_tree(n, rng);
  s.e1_index = static_cast<int>(uniform_index(rng, n));
  s.e2_index = static_cast<int>(uniform_index(rng, n - 1));
  if (s.e2_index >= s.e1_index) ++s.e2_index;
  s.tokens[static_cast<std::size_t>(s.e1_index)] = e1;
  s.tokens[static_cast<std::size_t>(s.e2_index)] = e2;
  return s;
}

inline Dataset toy_dataset(std::size_t n_bags, std::size_t n_relations, Rng& rng) {
  Dataset d;
  d.relation_names.push_back("NA");
  for (std::size_t r = 1; r < n_relations; ++r) d.relation_names.push_back("r" + std::to_string(r));
  for (std::size_t b = 0; b < n_bags; ++b) {
    Bag bag{"ea" + std::to_string(b), "eb" + std::to_string(b), static_cast<int>(uniform_index(rng, n_relations)),
            {}};
    const std::size_t n = 1 + uniform_index(rng, 3);
    for (std::size_t i = 0; i < n; ++i) bag.sentences.push_back(toy_sentence(bag.e1, bag.e2, 3, 7, 6, rng));
    d.bags.push_back(std::move(bag));
  }
  return d;
}

// Toy model over `data`; interpolation logits are randomised so both TRANS
// branches carry gradient.
inline Model toy_model(const Dataset& data, Strategy strategy, std::uint64_t seed) {
  const TrainConfig c = toy_config(strategy, seed);
  Model m = make_model(c, data.relation_names, build_vocab(data, 1), build_arc_vocab(data, 1));
  if (m.params.contains("head.alpha")) {
    Rng rng = make_rng({seed, 0x616c7068ull});
    init_uniform(m.params.at("head.alpha").value, rng, 1.0);
  }
  return m;
}

namespace detail {

// Adds a trainable stand-in input "in.<name>" and returns its name.
inline std::string add_input(Model& m, const std::string& name, std::size_t n, Rng& rng) {
  Tensor t(n);
  init_uniform(t, rng, 1.0);
  m.params.add("in." + name, std::move(t));
  return "in." + name;
}

// Random projection making a vector composite scalar.
inline Var project(Graph& g, Var v, std::uint64_t seed) {
  Rng rng = make_rng({seed, 0x70726f6aull});
  Tensor c(g.value(v).size());
  init_uniform(c, rng, 1.0);
  return g.dot(g.constant(std::move(c), "projection"), v);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Suites. Each returns one result per composite for a single seed.

inline std::vector<GradcheckResult> gradcheck_pcnn(std::uint64_t seed) {
  Rng rng = make_rng({seed, 1});
  const Dataset data = toy_dataset(1, 3, rng);
  Model m = toy_model(data, Strategy::kBaseline, seed);
  const EncodedSentence s = encode(m, data.bags[0].sentences[0]);
  return {check_graph("pcnn", m.params,
                      [&](Graph& g) { return detail::project(g, sentence_embedding(g, m, s), seed); },
                      {"emb.", "conv."})};
}

inline std::vector<GradcheckResult> gradcheck_entity(std::uint64_t seed) {
  Rng rng = make_rng({seed, 2});
  const Dataset data = toy_dataset(1, 3, rng);
  Model m = toy_model(data, Strategy::kTrans, seed);
  const std::size_t h = m.hidden();
  const std::string x = detail::add_input(m, "x", m.tree_input_dim(), rng);
  const std::string hc = detail::add_input(m, "h_children", h, rng);
  std::vector<GradcheckResult> out;
  out.push_back(check_graph(
      "gru_node", m.params,
      [&](Graph& g) { return detail::project(g, tree_gru_node(g, g.param(x), g.param(hc)), seed); },
      {"gru.", "in."}));
  // Deepest-subtree entity: the root of the first sentence's tree.
  ParsedSentence sent = data.bags[0].sentences[0];
  const EncodedSentence s = encode(m, sent);
  for (int which : {s.e1, s.e2}) {
    out.push_back(check_graph(
        which == s.e1 ? "entity_subtree_e1" : "entity_subtree_e2", m.params,
        [&](Graph& g) { return detail::project(g, entity_context_embedding(g, m, s, which), seed); },
        {"emb.", "gru."}));
  }
  const auto root = std::find(sent.heads.begin(), sent.heads.end(), -1) - sent.heads.begin();
  out.push_back(check_graph(
      "entity_subtree_root", m.params,
      [&](Graph& g) {
        return detail::project(g, entity_context_embedding(g, m, s, static_cast<int>(root)), seed);
      },
      {"emb.", "gru."}));
  return out;
}

inline std::vector<GradcheckResult> gradcheck_attention(std::uint64_t seed) {
  Rng rng = make_rng({seed, 3});
  const Dataset data = toy_dataset(1, 3, rng);
  Model m = toy_model(data, Strategy::kTrans, seed);
  const std::size_t n = 2 + uniform_index(rng, 3);
  auto items = [&](const std::string& tag, std::size_t dim) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back(detail::add_input(m, tag + std::to_string(i), dim, rng));
    return names;
  };
  const auto child = items("child", m.hidden());
  const auto sent = items("sent", m.sentence_dim());
  const auto ent = items("ent", m.hidden());
  auto vars = [](Graph& g, const std::vector<std::string>& names) {
    std::vector<Var> v;
    for (const auto& nm : names) v.push_back(g.param(nm));
    return v;
  };
  return {
      check_graph("att_child", m.params,
                  [&](Graph& g) { return detail::project(g, child_attention(g, vars(g, child)).vector, seed); },
                  {"gru.att.", "in.child"}),
      check_graph("att_sentence", m.params,
                  [&](Graph& g) {
                    return detail::project(g, self_attention_pool(g, "att.sent", vars(g, sent)).vector, seed);
                  },
                  {"att.sent.", "in.sent"}),
      check_graph("att_entity", m.params,
                  [&](Graph& g) {
                    const auto e = vars(g, ent);
                    return detail::project(
                        g, g.concat({self_attention_pool(g, "att.e1", e).vector,
                                     self_attention_pool(g, "att.e2", e).vector}),
                        seed);
                  },
                  {"att.e1.", "att.e2.", "in.ent"}),
  };
}

inline std::vector<GradcheckResult> gradcheck_heads(std::uint64_t seed) {
  Rng rng = make_rng({seed, 4});
  const Dataset data = toy_dataset(1, 4, rng);
  std::vector<GradcheckResult> out;
  for (Strategy st : {Strategy::kCat, Strategy::kTrans}) {
    Model m = toy_model(data, st, seed);
    const std::string s = detail::add_input(m, "s", m.sentence_dim(), rng);
    const std::string e1 = detail::add_input(m, "e1", m.hidden(), rng);
    const std::string e2 = detail::add_input(m, "e2", m.hidden(), rng);
    const std::size_t gold = uniform_index(rng, data.relation_names.size());
    out.push_back(check_graph(
        st == Strategy::kCat ? "head_cat" : "head_trans", m.params,
        [&](Graph& g) {
          const Var scores = st == Strategy::kCat
                                 ? score_cat(g, g.param(s), g.param(e1), g.param(e2))
                                 : score_trans(g, g.param(s), g.param(e1), g.param(e2));
          return g.cross_entropy(scores, gold);
        },
        {"head.", "in."}));
  }
  return out;
}

// End-to-end mean bag loss on a 2-bag corpus with dropout active; the mask
// stream is re-seeded for every evaluation.
inline std::vector<GradcheckResult> gradcheck_bag_loss(std::uint64_t seed) {
  Rng rng = make_rng({seed, 5});
  const Dataset data = toy_dataset(2, 4, rng);
  std::vector<GradcheckResult> out;
  for (Strategy st : {Strategy::kBaseline, Strategy::kCat, Strategy::kTrans}) {
    Model m = toy_model(data, st, seed);
    const std::vector<EncodedBag> bags = encode(m, data);
    auto run = [&](bool accumulate) {
      Rng drop = make_rng({seed, 0x64726f70ull});
      return bag_loss(bags, m, st, 0.5, &drop, accumulate);
    };
    out.push_back(compare_gradients("bag_loss_" + to_string(st), m.params, [&] { return run(false); },
                                    [&] { run(true); }));
  }
  return out;
}

inline const std::vector<std::string>& gradcheck_modules() {
  static const std::vector<std::string> names = {"pcnn", "entity", "attention", "heads", "bag_loss"};
  return names;
}

inline std::vector<GradcheckResult> gradcheck_module(const std::string& module, std::uint64_t seed) {
  if (module == "pcnn") return gradcheck_pcnn(seed);
  if (module == "entity") return gradcheck_entity(seed);
  if (module == "attention") return gradcheck_attention(seed);
  if (module == "heads") return gradcheck_heads(seed);
  if (module == "bag_loss") return gradcheck_bag_loss(seed);
  throw std::invalid_argument("unknown gradcheck module '" + module + "'");
}

// Max error per composite over seeds 1..n_seeds, in first-seen order.
inline std::vector<GradcheckResult> run_gradcheck(const std::vector<std::string>& modules,
                                                  std::uint64_t n_seeds = 20) {
  std::vector<GradcheckResult> merged;
  for (const auto& mod : modules) {
    for (std::uint64_t seed = 1; seed <= n_seeds; ++seed) {
      for (auto& r : gradcheck_module(mod, seed)) {
        auto it = std::find_if(merged.begin(), merged.end(),
                               [&](const GradcheckResult& x) { return x.composite == r.composite; });
        if (it == merged.end()) {
          r.worst = "seed " + std::to_string(seed) + " " + r.worst;
          merged.push_back(std::move(r));
        } else {
          it->coordinates += r.coordinates;
          if (r.max_rel_error > it->max_rel_error) {
            it->max_rel_error = r.max_rel_error;
            it->worst = "seed " + std::to_string(seed) + " " + r.worst;
          }
        }
      }
    }
  }
  return merged;
}

}  // namespace see
