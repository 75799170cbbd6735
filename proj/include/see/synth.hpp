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

// Deterministic synthetic distant-supervision corpora with controllable
// wrong-label noise.
//
// Every relation has a template. A sentence looks like
//
//   [prefix fillers] E1 [between words] E2 [modifiers of E1 and E2, shuffled] [fillers]
//
// with one of the between words as the tree root and both entities attached to
// it. The root is one of the relation's trigger words with probability
// `trigger_prob`, otherwise a filler. The relation also fixes which modifier
// pool hangs under each entity in the tree. Non-NA relations come in pairs
// that share pools with the attachment swapped, and the modifiers sit in a
// shuffled tail after E2, so the word sequence alone cannot tell the two
// members of a pair apart; the entity subtrees always can. NA sentences use
// fillers only.
#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "see/corpus.hpp"
#include "see/numerics.hpp"

namespace see {

struct SynthConfig {
  int n_relations = 5;  // including NA
  int n_entity_pairs = 600;
  int n_test_pairs = 200;
  int bag_size_min = 2;
  int bag_size_max = 5;
  int vocab_size = 50;  // filler words
  int sentence_length_min = 8;
  int sentence_length_max = 16;
  double noise_rate = 0.0;
  double trigger_prob = 0.7;
  int triggers_per_relation = 3;
  int modifiers_per_pool = 3;
  std::uint64_t seed = 1;
};

inline void validate(const SynthConfig& c) {
  auto bad = [](const std::string& m) { throw DataError("infeasible synthetic config: " + m); };
  if (c.n_relations < 2) bad("n_relations must be >= 2 (NA plus one relation)");
  if (c.n_entity_pairs < 1 || c.n_test_pairs < 0) bad("entity pair counts");
  if (c.bag_size_min < 1 || c.bag_size_max < c.bag_size_min) bad("bag_size_range is empty");
  if (c.vocab_size < 1) bad("vocab_size must be positive");
  if (c.sentence_length_min < 5 || c.sentence_length_max < c.sentence_length_min) {
    bad("sentence_length_range must be non-empty with minimum >= 5");
  }
  if (!(c.noise_rate >= 0.0 && c.noise_rate < 1.0)) bad("noise_rate must lie in [0, 1)");
  if (!(c.trigger_prob >= 0.0 && c.trigger_prob <= 1.0)) bad("trigger_prob must lie in [0, 1]");
  if (c.triggers_per_relation < 1 || c.modifiers_per_pool < 1) bad("word set sizes");
}

inline void to_json(nlohmann::json& j, const SynthConfig& c) {
  j = nlohmann::json{{"n_relations", c.n_relations},
                     {"n_entity_pairs", c.n_entity_pairs},
                     {"n_test_pairs", c.n_test_pairs},
                     {"bag_size_range", {c.bag_size_min, c.bag_size_max}},
                     {"vocab_size", c.vocab_size},
                     {"sentence_length_range", {c.sentence_length_min, c.sentence_length_max}},
                     {"noise_rate", c.noise_rate},
                     {"trigger_prob", c.trigger_prob},
                     {"triggers_per_relation", c.triggers_per_relation},
                     {"modifiers_per_pool", c.modifiers_per_pool},
                     {"seed", c.seed}};
}

// Missing keys keep their defaults; unknown keys are rejected.
inline void from_json(const nlohmann::json& j, SynthConfig& c) {
  static const char* known[] = {"n_relations",   "n_entity_pairs",        "n_test_pairs",
                                "bag_size_range", "vocab_size",            "sentence_length_range",
                                "noise_rate",    "trigger_prob",          "triggers_per_relation",
                                "modifiers_per_pool", "seed"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw DataError("unknown synthetic config key '" + key + "'");
    }
  }
  auto get = [&](const char* k, auto& field) {
    if (j.contains(k)) j.at(k).get_to(field);
  };
  get("n_relations", c.n_relations);
  get("n_entity_pairs", c.n_entity_pairs);
  get("n_test_pairs", c.n_test_pairs);
  get("vocab_size", c.vocab_size);
  get("noise_rate", c.noise_rate);
  get("trigger_prob", c.trigger_prob);
  get("triggers_per_relation", c.triggers_per_relation);
  get("modifiers_per_pool", c.modifiers_per_pool);
  get("seed", c.seed);
  if (j.contains("bag_size_range")) {
    auto r = j.at("bag_size_range").get<std::vector<int>>();
    if (r.size() != 2) throw DataError("bag_size_range needs two entries");
    c.bag_size_min = r[0];
    c.bag_size_max = r[1];
  }
  if (j.contains("sentence_length_range")) {
    auto r = j.at("sentence_length_range").get<std::vector<int>>();
    if (r.size() != 2) throw DataError("sentence_length_range needs two entries");
    c.sentence_length_min = r[0];
    c.sentence_length_max = r[1];
  }
}

struct SyntheticCorpus {
  Dataset train;
  Dataset test;  // disjoint entity pairs, noise-free labels
};

namespace detail {

class SentenceFactory {
 public:
  explicit SentenceFactory(const SynthConfig& c) : cfg_(c) {}

  ParsedSentence make(int relation, const std::string& e1, const std::string& e2, Rng& rng) const {
    const int length = uniform_int(rng, cfg_.sentence_length_min, cfg_.sentence_length_max);
    int budget = length - 5;  // E1, root, E2 and one modifier per entity are mandatory
    auto take = [&](int want) {
      const int got = std::min(want, budget);
      budget -= got;
      return got;
    };
    const int extra_mod1 = take(uniform_int(rng, 0, 1));
    const int extra_mod2 = take(uniform_int(rng, 0, 1));
    const int extra_between = take(uniform_int(rng, 0, 2));
    const int prefix = take(uniform_int(rng, 0, 2));
    const int suffix = budget;

    ParsedSentence s;
    auto push = [&](std::string w, int head) {
      s.tokens.push_back(std::move(w));
      s.heads.push_back(head);
      return static_cast<int>(s.tokens.size()) - 1;
    };
    // Heads are fixed up once the root position is known.
    std::vector<int> attach_to_root;
    for (int i = 0; i < prefix; ++i) attach_to_root.push_back(push(filler(rng), -2));
    s.e1_index = push(e1, -2);
    attach_to_root.push_back(s.e1_index);
    const int between = 1 + extra_between;
    const int root_slot = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(between)));
    int root = -1;
    for (int i = 0; i < between; ++i) {
      if (i == root_slot) {
        const bool trigger = relation != 0 && uniform01(rng) < cfg_.trigger_prob;
        root = push(trigger ? trigger_word(relation, rng) : filler(rng), -1);
      } else {
        attach_to_root.push_back(push(filler(rng), -2));
      }
    }
    s.e2_index = push(e2, -2);
    attach_to_root.push_back(s.e2_index);

    // Modifiers: the first hangs under its entity, later ones under the
    // entity or the previous modifier.
    struct Mod {
      std::string word;
      int entity;  // 0 or 1
      int parent_mod;  // index into mods, -1 = the entity itself
    };
    std::vector<Mod> mods;
    const auto [pool1, pool2] = pools(relation);
    for (int ent = 0; ent < 2; ++ent) {
      const int count = 1 + (ent == 0 ? extra_mod1 : extra_mod2);
      const int pool = ent == 0 ? pool1 : pool2;
      int prev = -1;
      for (int k = 0; k < count; ++k) {
        const int parent = (k > 0 && uniform01(rng) < 0.5) ? prev : -1;
        mods.push_back({modifier_word(pool, rng), ent, parent});
        prev = static_cast<int>(mods.size()) - 1;
      }
    }
    std::vector<int> order(mods.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    shuffle_in_place(std::span<int>(order), rng);
    std::vector<int> position(mods.size());
    for (int m : order) position[static_cast<std::size_t>(m)] = push(mods[static_cast<std::size_t>(m)].word, -2);
    for (std::size_t m = 0; m < mods.size(); ++m) {
      const Mod& md = mods[m];
      s.heads[static_cast<std::size_t>(position[m])] =
          md.parent_mod >= 0 ? position[static_cast<std::size_t>(md.parent_mod)]
                             : (md.entity == 0 ? s.e1_index : s.e2_index);
    }
    for (int i = 0; i < suffix; ++i) attach_to_root.push_back(push(filler(rng), -2));
    for (int t : attach_to_root) s.heads[static_cast<std::size_t>(t)] = root;
    return s;
  }

 private:
  std::string filler(Rng& rng) const {
    return "w" + std::to_string(uniform_index(rng, static_cast<std::size_t>(cfg_.vocab_size)));
  }
  std::string trigger_word(int relation, Rng& rng) const {
    return "trig" + std::to_string(relation) + "_" +
           std::to_string(uniform_index(rng, static_cast<std::size_t>(cfg_.triggers_per_relation)));
  }
  // Pool -1 means "fillers".
  std::string modifier_word(int pool, Rng& rng) const {
    if (pool < 0) return filler(rng);
    return "mod" + std::to_string(pool) + "_" +
           std::to_string(uniform_index(rng, static_cast<std::size_t>(cfg_.modifiers_per_pool)));
  }
  // Relations 2k+1 and 2k+2 share pools 2k and 2k+1 with swapped roles; an
  // unpaired last relation keeps its own pools.
  std::pair<int, int> pools(int relation) const {
    if (relation == 0) return {-1, -1};
    const int k = (relation - 1) / 2;
    const bool second = (relation - 1) % 2 == 1;
    return second ? std::pair{2 * k + 1, 2 * k} : std::pair{2 * k, 2 * k + 1};
  }

  SynthConfig cfg_;
};

inline Dataset make_split(const SynthConfig& c, const SentenceFactory& factory, int n_pairs,
                          const std::string& entity_prefix, double noise, Rng& rng) {
  Dataset d;
  d.relation_names.push_back("NA");
  for (int r = 1; r < c.n_relations; ++r) d.relation_names.push_back("rel_" + std::to_string(r));

  std::vector<int> labels(static_cast<std::size_t>(n_pairs));
  for (int i = 0; i < n_pairs; ++i) labels[static_cast<std::size_t>(i)] = i % c.n_relations;
  shuffle_in_place(std::span<int>(labels), rng);

  for (int i = 0; i < n_pairs; ++i) {
    Bag bag;
    bag.e1 = entity_prefix + std::to_string(i) + "_a";
    bag.e2 = entity_prefix + std::to_string(i) + "_b";
    bag.relation_id = labels[static_cast<std::size_t>(i)];
    const int size = uniform_int(rng, c.bag_size_min, c.bag_size_max);
    std::vector<bool> noisy(static_cast<std::size_t>(size));
    for (auto&& f : noisy) f = uniform01(rng) < noise;
    if (size >= 2 && std::all_of(noisy.begin(), noisy.end(), [](bool f) { return f; })) {
      noisy[uniform_index(rng, static_cast<std::size_t>(size))] = false;
    }
    for (int k = 0; k < size; ++k) {
      int template_relation = bag.relation_id;
      if (noisy[static_cast<std::size_t>(k)]) {
        // Uniform over the other relations.
        template_relation = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(c.n_relations - 1)));
        if (template_relation >= bag.relation_id) ++template_relation;
      }
      ParsedSentence s = factory.make(template_relation, bag.e1, bag.e2, rng);
      s.noisy = static_cast<bool>(noisy[static_cast<std::size_t>(k)]);
      bag.sentences.push_back(std::move(s));
    }
    d.bags.push_back(std::move(bag));
  }
  return d;
}

}  // namespace detail

inline SyntheticCorpus generate_synthetic(const SynthConfig& config) {
  validate(config);
  const detail::SentenceFactory factory(config);
  Rng train_rng = make_rng({config.seed, 0x7472616eull});
  Rng test_rng = make_rng({config.seed, 0x74657374ull});
  SyntheticCorpus out;
  out.train = detail::make_split(config, factory, config.n_entity_pairs, "ent", config.noise_rate,
                                 train_rng);
  out.test = detail::make_split(config, factory, config.n_test_pairs, "test_ent", 0.0, test_rng);
  return out;
}

}  // namespace see
