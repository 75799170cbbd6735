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

// Model container, parameter layout and per-token input vectors.
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "see/config.hpp"
#include "see/corpus.hpp"
#include "see/embeddings.hpp"
#include "see/numerics.hpp"

namespace see {

struct Model {
  TrainConfig config;
  std::vector<std::string> relations;
  Vocab words{"<unk>"};
  Vocab arcs{"<unk-dep>"};
  ParamStore params;

  std::size_t n_relations() const { return relations.size(); }
  std::size_t pcnn_input_dim() const {
    return static_cast<std::size_t>(config.d_word + 2 * config.d_pos);
  }
  std::size_t tree_input_dim() const {
    return pcnn_input_dim() + static_cast<std::size_t>(config.d_dep);
  }
  std::size_t sentence_dim() const { return 3 * static_cast<std::size_t>(config.filters); }
  std::size_t hidden() const { return static_cast<std::size_t>(config.hidden); }
};

struct ParamSpec {
  std::string name;
  std::vector<std::size_t> shape;
};

// Every trainable tensor the given strategy needs, with its shape.
inline std::vector<ParamSpec> param_layout(const TrainConfig& c, std::size_t n_relations,
                                           std::size_t n_words, std::size_t n_arcs) {
  using S = std::vector<std::size_t>;
  const std::size_t dw = c.d_word, dp = c.d_pos, dd = c.d_dep, k = c.filters, h = c.hidden;
  const std::size_t positions = 2 * static_cast<std::size_t>(c.position_clip) + 1;
  const std::size_t in_pcnn = dw + 2 * dp, in_tree = in_pcnn + dd, ds = 3 * k;
  std::vector<ParamSpec> out = {
      {"emb.word", S{n_words, dw}},
      {"emb.pos1", S{positions, dp}},
      {"emb.pos2", S{positions, dp}},
      {"conv.filters", S{k, static_cast<std::size_t>(c.window) * in_pcnn}},
      {"att.sent.W", S{ds, ds}},
      {"att.sent.v", S{ds}},
  };
  if (c.strategy != Strategy::kCat) {
    out.push_back({"head.s.W", S{n_relations, ds}});
    out.push_back({"head.s.b", S{n_relations}});
  }
  if (uses_entities(c.strategy)) {
    out.push_back({"emb.dep", S{n_arcs, dd}});
    for (const char* g : {"z", "r", "h"}) {
      out.push_back({std::string("gru.W") + g, S{h, in_tree}});
      out.push_back({std::string("gru.U") + g, S{h, h}});
      out.push_back({std::string("gru.b") + g, S{h}});
    }
    out.push_back({"gru.att.W", S{h, h}});
    out.push_back({"gru.att.v", S{h}});
    out.push_back({"att.e1.W", S{h, h}});
    out.push_back({"att.e1.v", S{h}});
    out.push_back({"att.e2.W", S{h, h}});
    out.push_back({"att.e2.v", S{h}});
  }
  if (c.strategy == Strategy::kCat) {
    out.push_back({"head.cat.W", S{n_relations, ds + 2 * h}});
    out.push_back({"head.cat.b", S{n_relations}});
  }
  if (c.strategy == Strategy::kTrans) {
    out.push_back({"head.see.W", S{n_relations, h}});
    out.push_back({"head.see.b", S{n_relations}});
    out.push_back({"head.alpha", S{n_relations}});
  }
  return out;
}

inline Tensor zeros(const std::vector<std::size_t>& shape) {
  return shape.size() == 2 ? Tensor(shape[0], shape[1]) : Tensor(shape[0]);
}

// Fresh model: every tensor uniform on [-0.08, 0.08] from config.seed, in
// name order, except the TRANS interpolation logits which start at 0.
inline Model make_model(const TrainConfig& config, std::vector<std::string> relations, Vocab words,
                        Vocab arcs) {
  validate(config);
  Model m;
  m.config = config;
  m.relations = std::move(relations);
  m.words = std::move(words);
  m.arcs = std::move(arcs);
  for (const auto& spec : param_layout(config, m.relations.size(), m.words.size(), m.arcs.size())) {
    m.params.add(spec.name, zeros(spec.shape));
  }
  Rng rng = make_rng({config.seed, 0x696e6974ull});
  for (auto& [name, p] : m.params) {
    if (name != "head.alpha") init_uniform(p.value, rng);
  }
  return m;
}

// Dependency-arc vocabulary over a dataset (lexicalised head→child pairs).
inline Vocab build_arc_vocab(const Dataset& data, long min_count) {
  std::map<std::string, long> counts;
  for (const Bag& b : data.bags) {
    for (const ParsedSentence& s : b.sentences) {
      for (std::size_t i = 0; i < s.tokens.size(); ++i) ++counts[arc_symbol(s.tokens, s.heads, i)];
    }
  }
  return vocab_from_counts(counts, min_count, "<unk-dep>");
}

// Copies rows for symbols present in both the table and the model vocabulary.
inline std::size_t apply_pretrained(Model& m, const std::string& param, const Vocab& vocab,
                                    const EmbeddingTable& table) {
  Param& p = m.params.at(param);
  if (table.dim() != p.value.cols()) {
    throw DataError("embedding dimension mismatch for " + param + ": file has " +
                    std::to_string(table.dim()) + ", model expects " +
                    std::to_string(p.value.cols()));
  }
  std::size_t copied = 0;
  for (std::size_t r = 0; r < table.vocab.size(); ++r) {
    const std::string& sym = table.vocab.symbol(static_cast<int>(r));
    if (!vocab.contains(sym)) continue;
    auto src = table.vectors.row(r);
    auto dst = p.value.row(static_cast<std::size_t>(vocab.id(sym)));
    std::copy(src.begin(), src.end(), dst.begin());
    ++copied;
  }
  return copied;
}

// ---------------------------------------------------------------------------

// A sentence resolved against a model's vocabularies.
struct EncodedSentence {
  std::vector<int> words;
  std::vector<int> arcs;
  std::vector<int> heads;
  std::vector<std::vector<int>> children;
  int e1 = 0;
  int e2 = 0;

  std::size_t size() const { return words.size(); }
};

struct EncodedBag {
  std::vector<EncodedSentence> sentences;
  int relation_id = 0;
};

inline EncodedSentence encode(const Model& m, const ParsedSentence& s) {
  EncodedSentence e;
  e.heads = s.heads;
  e.children = children_of(s.heads);
  e.e1 = s.e1_index;
  e.e2 = s.e2_index;
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    e.words.push_back(m.words.id(s.tokens[i]));
    e.arcs.push_back(m.arcs.id(arc_symbol(s.tokens, s.heads, i)));
  }
  return e;
}

inline EncodedBag encode(const Model& m, const Bag& b) {
  EncodedBag e;
  e.relation_id = b.relation_id;
  for (const auto& s : b.sentences) e.sentences.push_back(encode(m, s));
  return e;
}

inline std::vector<EncodedBag> encode(const Model& m, const Dataset& d) {
  std::vector<EncodedBag> out;
  out.reserve(d.bags.size());
  for (const auto& b : d.bags) out.push_back(encode(m, b));
  return out;
}

enum class InputMode { kPcnn, kTree };

// [word; pos(i - e1); pos(i - e2)], plus the entering arc's embedding in tree
// mode.
inline Var input_vector(Graph& g, const Model& m, const EncodedSentence& s, std::size_t i,
                        InputMode mode) {
  const int clip = m.config.position_clip;
  const int pos = static_cast<int>(i);
  std::vector<Var> parts = {
      g.lookup("emb.word", static_cast<std::size_t>(s.words[i])),
      g.lookup("emb.pos1", static_cast<std::size_t>(relative_position_bucket(pos, s.e1, clip))),
      g.lookup("emb.pos2", static_cast<std::size_t>(relative_position_bucket(pos, s.e2, clip))),
  };
  if (mode == InputMode::kTree) parts.push_back(g.lookup("emb.dep", static_cast<std::size_t>(s.arcs[i])));
  return g.concat(parts);
}

inline Tensor input_vector(const Model& m, const ParsedSentence& s, std::size_t i, InputMode mode) {
  Graph g(m.params);
  const EncodedSentence e = encode(m, s);
  return g.value(input_vector(g, m, e, i, mode));
}

}  // namespace see
