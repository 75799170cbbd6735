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

// Held-out ranking evaluation, P@N and sentence-attention diagnostics.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "see/bag_classifier.hpp"
#include "see/corpus.hpp"
#include "see/errors.hpp"
#include "see/io.hpp"
#include "see/model.hpp"

namespace see {

struct ScoredFact {
  std::string e1;
  std::string e2;
  int relation_id = 0;
  std::string relation;
  double probability = 0.0;

  friend bool operator==(const ScoredFact&, const ScoredFact&) = default;
};

struct GoldFact {
  std::string e1;
  int relation_id = 0;
  std::string e2;

  friend auto operator<=>(const GoldFact&, const GoldFact&) = default;
};

using GoldSet = std::set<GoldFact>;

struct PRPoint {
  std::size_t rank = 0;
  double probability = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

// Non-NA bag labels of a corpus.
inline GoldSet gold_facts(const Dataset& data) {
  GoldSet gold;
  const int na = data.na_id();
  for (const Bag& b : data.bags) {
    if (b.relation_id != na) gold.insert({b.e1, b.relation_id, b.e2});
  }
  return gold;
}

// One fact per (bag, non-NA relation), in bag then relation order.
inline std::vector<ScoredFact> predict_bags(const Dataset& data, const Model& m) {
  const int na = data.na_id();
  std::vector<ScoredFact> out;
  for (const Bag& bag : data.bags) {
    const std::vector<double> probs = predict_probs(m, encode(m, bag));
    for (std::size_t r = 0; r < probs.size(); ++r) {
      if (static_cast<int>(r) == na) continue;
      out.push_back({bag.e1, bag.e2, static_cast<int>(r), m.relations[r], probs[r]});
    }
  }
  return out;
}

// Fraction of bags whose argmax relation (NA included) equals the label.
inline double bag_accuracy(const Dataset& data, const Model& m, Strategy strategy) {
  if (data.bags.empty()) throw DataError("bag_accuracy: empty dataset");
  std::size_t hits = 0;
  for (const Bag& bag : data.bags) {
    const std::vector<double> p = predict_probs(m, encode(m, bag), strategy);
    const auto best = std::max_element(p.begin(), p.end()) - p.begin();
    hits += best == bag.relation_id;
  }
  return static_cast<double>(hits) / static_cast<double>(data.bags.size());
}

inline double bag_accuracy(const Dataset& data, const Model& m) {
  return bag_accuracy(data, m, m.config.strategy);
}

// Probability descending; ties by (e1, e2, relation_id).
inline std::vector<ScoredFact> rank_facts(std::vector<ScoredFact> facts) {
  for (const auto& f : facts) {
    if (!std::isfinite(f.probability)) throw NumericError("non-finite probability for " + f.e1 + "," + f.e2);
  }
  std::stable_sort(facts.begin(), facts.end(), [](const ScoredFact& a, const ScoredFact& b) {
    if (a.probability != b.probability) return a.probability > b.probability;
    return std::tie(a.e1, a.e2, a.relation_id) < std::tie(b.e1, b.e2, b.relation_id);
  });
  return facts;
}

namespace detail {
// A gold fact scores once; repeated predictions of it count as misses.
inline bool is_new_hit(const ScoredFact& f, const GoldSet& gold, GoldSet& found) {
  GoldFact key{f.e1, f.relation_id, f.e2};
  return gold.contains(key) && found.insert(std::move(key)).second;
}
}  // namespace detail

inline std::vector<PRPoint> pr_curve(const std::vector<ScoredFact>& scored, const GoldSet& gold) {
  if (gold.empty()) throw DataError("pr_curve: gold set is empty");
  const auto ranked = rank_facts(scored);
  std::vector<PRPoint> out;
  out.reserve(ranked.size());
  GoldSet found;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    const auto& f = ranked[k];
    hits += detail::is_new_hit(f, gold, found);
    out.push_back({k + 1, f.probability, static_cast<double>(hits) / static_cast<double>(k + 1),
                   static_cast<double>(hits) / static_cast<double>(gold.size())});
  }
  return out;
}

inline double p_at_n(const std::vector<ScoredFact>& scored, const GoldSet& gold, std::size_t n) {
  if (n == 0) throw DataError("p_at_n: N must be positive");
  if (n > scored.size()) {
    throw DataError("p_at_n: N=" + std::to_string(n) + " exceeds the " + std::to_string(scored.size()) +
                    " scored facts");
  }
  const auto ranked = rank_facts(scored);
  GoldSet found;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < n; ++k) hits += detail::is_new_hit(ranked[k], gold, found);
  return static_cast<double>(hits) / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// CSV formats

inline std::string format_predictions(const std::vector<ScoredFact>& facts) {
  std::string out = "e1,e2,relation_id,relation,probability\n";
  for (const auto& f : facts) {
    out += csv_field(f.e1) + "," + csv_field(f.e2) + "," + std::to_string(f.relation_id) + "," +
           csv_field(f.relation) + "," + format_double(f.probability) + "\n";
  }
  return out;
}

inline std::vector<ScoredFact> parse_predictions(std::string_view text) {
  std::vector<ScoredFact> out;
  std::size_t line_no = 0;
  for (const std::string& line : split(text, '\n')) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    const auto f = parse_csv_line(line);
    if (f.size() != 5) throw DataError("predictions line " + std::to_string(line_no) + ": expected 5 fields");
    try {
      out.push_back({f[0], f[1], std::stoi(f[2]), f[3], std::stod(f[4])});
    } catch (const std::logic_error&) {
      throw DataError("predictions line " + std::to_string(line_no) + ": malformed number");
    }
  }
  return out;
}

// Gold facts from a corpus file, keyed by the relation ids the predictions
// use for the same names.
inline GoldSet gold_for_predictions(const Dataset& data, const std::vector<ScoredFact>& preds) {
  std::map<std::string, int> ids;
  for (const auto& f : preds) ids.emplace(f.relation, f.relation_id);
  int next = -1;
  GoldSet gold;
  for (const Bag& b : data.bags) {
    const std::string& name = data.relation_names[b.relation_id];
    if (name == "NA") continue;
    auto [it, fresh] = ids.emplace(name, 0);
    if (fresh) it->second = next--;
    gold.insert({b.e1, it->second, b.e2});
  }
  return gold;
}

inline std::string format_pr_curve(const std::vector<PRPoint>& points) {
  std::string out = "rank,probability,precision,recall\n";
  for (const auto& p : points) {
    out += std::to_string(p.rank) + "," + format_double(p.probability) + "," + format_double(p.precision) +
           "," + format_double(p.recall) + "\n";
  }
  return out;
}

inline std::string format_p_at_n(const std::vector<std::pair<std::size_t, double>>& rows) {
  std::string out = "N,precision\n";
  for (const auto& [n, p] : rows) out += std::to_string(n) + "," + format_double(p) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Sentence attention diagnostics

struct AttentionRow {
  std::size_t bag_id = 0;
  std::size_t sentence_idx = 0;
  double weight = 0.0;
  bool noisy = false;
};

struct AttentionReport {
  std::vector<AttentionRow> rows;
  // Means over bags of size >= 2 holding both clean and noisy sentences.
  double clean_mean = 0.0;
  double noisy_mean = 0.0;
  std::size_t clean_count = 0;
  std::size_t noisy_count = 0;
  std::size_t mixed_bags = 0;
};

inline std::vector<double> sentence_attention(const Model& m, const EncodedBag& bag) {
  Graph g(m.params);
  const BagForward f = forward_bag(g, m, bag, m.config.strategy);
  return g.value(f.rep.sentences.weights).data();
}

inline AttentionReport attention_report(const Dataset& data, const Model& m) {
  AttentionReport rep;
  double clean_sum = 0.0, noisy_sum = 0.0;
  for (std::size_t b = 0; b < data.bags.size(); ++b) {
    const Bag& bag = data.bags[b];
    for (std::size_t i = 0; i < bag.sentences.size(); ++i) {
      if (!bag.sentences[i].noisy) {
        throw DataError("attention report needs noisy flags (bag " + std::to_string(b) + ", sentence " +
                        std::to_string(i) + ")");
      }
    }
    const std::vector<double> w = sentence_attention(m, encode(m, bag));
    std::size_t n_noisy = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const bool noisy = *bag.sentences[i].noisy;
      n_noisy += noisy;
      rep.rows.push_back({b, i, w[i], noisy});
    }
    if (w.size() < 2 || n_noisy == 0 || n_noisy == w.size()) continue;
    ++rep.mixed_bags;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (*bag.sentences[i].noisy) {
        noisy_sum += w[i];
        ++rep.noisy_count;
      } else {
        clean_sum += w[i];
        ++rep.clean_count;
      }
    }
  }
  if (rep.clean_count) rep.clean_mean = clean_sum / static_cast<double>(rep.clean_count);
  if (rep.noisy_count) rep.noisy_mean = noisy_sum / static_cast<double>(rep.noisy_count);
  return rep;
}

inline std::string format_attention_report(const AttentionReport& rep) {
  std::string out = "bag_id,sentence_idx,att_weight,noisy\n";
  for (const auto& r : rep.rows) {
    out += std::to_string(r.bag_id) + "," + std::to_string(r.sentence_idx) + "," + format_double(r.weight) +
           "," + (r.noisy ? "true" : "false") + "\n";
  }
  out += "summary,clean," + format_double(rep.clean_mean) + ",false\n";
  out += "summary,noisy," + format_double(rep.noisy_mean) + ",true\n";
  return out;
}

}  // namespace see
