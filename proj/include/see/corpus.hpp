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

// Data model and JSONL I/O for dependency-parsed, bag-grouped corpora.
#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "see/errors.hpp"
#include "see/io.hpp"

namespace see {

struct ParsedSentence {
  std::vector<std::string> tokens;
  std::vector<int> heads;  // -1 marks the root
  int e1_index = 0;
  int e2_index = 0;
  std::optional<bool> noisy;  // synthetic diagnostics only

  friend bool operator==(const ParsedSentence&, const ParsedSentence&) = default;
};

struct Bag {
  std::string e1;
  std::string e2;
  int relation_id = 0;
  std::vector<ParsedSentence> sentences;

  friend bool operator==(const Bag&, const Bag&) = default;
};

struct Dataset {
  std::vector<Bag> bags;
  std::vector<std::string> relation_names;

  int relation_id(const std::string& name) const {
    auto it = std::find(relation_names.begin(), relation_names.end(), name);
    return it == relation_names.end() ? -1 : static_cast<int>(it - relation_names.begin());
  }
  int na_id() const { return relation_id("NA"); }
  std::size_t sentence_count() const {
    std::size_t n = 0;
    for (const Bag& b : bags) n += b.sentences.size();
    return n;
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

namespace detail {

inline std::string join_indices(const std::vector<int>& idx) {
  std::string s;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i > 0) s += (i + 1 == idx.size()) ? " and " : ", ";
    s += std::to_string(idx[i]);
  }
  return s;
}

}  // namespace detail

// Returns an error description, or nullopt when `heads` is a single-rooted
// tree.
inline std::optional<std::string> validate_tree(std::span<const int> heads) {
  const int n = static_cast<int>(heads.size());
  if (n == 0) return "empty sentence";
  std::vector<int> roots;
  for (int i = 0; i < n; ++i) {
    if (heads[i] == -1) {
      roots.push_back(i);
    } else if (heads[i] < -1 || heads[i] >= n) {
      return "token " + std::to_string(i) + " has out-of-range head " + std::to_string(heads[i]);
    } else if (heads[i] == i) {
      return "token " + std::to_string(i) + " is its own head";
    }
  }
  if (roots.size() > 1) return "multiple roots at tokens " + detail::join_indices(roots);

  // 0 = unvisited, 1 = on the current chain, 2 = known to reach the root.
  std::vector<int> state(n, 0);
  for (int start = 0; start < n; ++start) {
    std::vector<int> chain;
    int cur = start;
    while (cur != -1 && state[cur] == 0) {
      state[cur] = 1;
      chain.push_back(cur);
      cur = heads[cur];
    }
    if (cur != -1 && state[cur] == 1) {
      auto it = std::find(chain.begin(), chain.end(), cur);
      std::vector<int> cycle(it, chain.end());
      std::sort(cycle.begin(), cycle.end());
      return "cycle between tokens " + detail::join_indices(cycle);
    }
    for (int c : chain) state[c] = 2;
  }
  if (roots.empty()) return "no root";
  return std::nullopt;
}

inline std::vector<std::vector<int>> children_of(std::span<const int> heads) {
  std::vector<std::vector<int>> ch(heads.size());
  for (std::size_t i = 0; i < heads.size(); ++i) {
    if (heads[i] >= 0) ch[static_cast<std::size_t>(heads[i])].push_back(static_cast<int>(i));
  }
  return ch;
}

// Throws DataError naming `where` on any sentence invariant violation.
inline void validate_sentence(const ParsedSentence& s, const std::string& where) {
  if (s.tokens.size() != s.heads.size()) {
    throw DataError(where + ": " + std::to_string(s.tokens.size()) + " tokens but " +
                    std::to_string(s.heads.size()) + " heads");
  }
  if (auto err = validate_tree(s.heads)) throw DataError(where + ": " + *err);
  const int n = static_cast<int>(s.tokens.size());
  if (s.e1_index < 0 || s.e1_index >= n || s.e2_index < 0 || s.e2_index >= n) {
    throw DataError(where + ": entity index out of range");
  }
  if (s.e1_index == s.e2_index) throw DataError(where + ": e1_index equals e2_index");
}

inline void validate_bag(const Bag& bag, std::size_t n_relations, const std::string& where) {
  if (bag.sentences.empty()) throw DataError(where + ": bag has no sentences");
  if (bag.relation_id < 0 || static_cast<std::size_t>(bag.relation_id) >= n_relations) {
    throw DataError(where + ": relation id " + std::to_string(bag.relation_id) + " out of range");
  }
  for (std::size_t i = 0; i < bag.sentences.size(); ++i) {
    const ParsedSentence& s = bag.sentences[i];
    const std::string w = where + ", sentence " + std::to_string(i);
    validate_sentence(s, w);
    if (s.tokens[s.e1_index] != bag.e1 || s.tokens[s.e2_index] != bag.e2) {
      throw DataError(w + ": entity tokens do not match the bag's entity pair");
    }
  }
}

inline void validate_relation_names(const std::vector<std::string>& names) {
  std::map<std::string, int> seen;
  for (const auto& n : names) {
    if (n.empty()) throw DataError("empty relation name");
    if (++seen[n] > 1) throw DataError("duplicate relation name '" + n + "'");
  }
  if (!seen.count("NA")) throw DataError("relation inventory lacks \"NA\"");
}

// ---------------------------------------------------------------------------
// Relation inventory: one name per line.

inline std::vector<std::string> parse_relations(std::string_view text) {
  std::vector<std::string> names;
  for (std::string line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) names.push_back(line);
  }
  validate_relation_names(names);
  return names;
}

inline std::vector<std::string> load_relations(const std::filesystem::path& path) {
  return parse_relations(read_file(path));
}

inline std::string format_relations(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) out += n + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Corpus JSONL: one bag per line.

inline nlohmann::ordered_json bag_to_json(const Bag& bag, const std::vector<std::string>& names) {
  nlohmann::ordered_json j;
  j["e1"] = bag.e1;
  j["e2"] = bag.e2;
  j["relation"] = names.at(static_cast<std::size_t>(bag.relation_id));
  auto& sents = j["sentences"] = nlohmann::ordered_json::array();
  for (const ParsedSentence& s : bag.sentences) {
    nlohmann::ordered_json js;
    js["tokens"] = s.tokens;
    js["heads"] = s.heads;
    js["e1_index"] = s.e1_index;
    js["e2_index"] = s.e2_index;
    if (s.noisy) js["noisy"] = *s.noisy;
    sents.push_back(std::move(js));
  }
  return j;
}

inline std::string format_corpus(const Dataset& data) {
  std::string out;
  for (const Bag& b : data.bags) out += bag_to_json(b, data.relation_names).dump() + "\n";
  return out;
}

inline void save_corpus(const Dataset& data, const std::filesystem::path& path) {
  write_file_atomic(path, format_corpus(data));
}

// Parses JSONL text. With a relation inventory, unknown relation names are
// rejected; without one, the inventory is built as "NA" followed by the
// other names in order of first appearance.
inline Dataset parse_corpus(std::string_view text,
                            const std::vector<std::string>* relations = nullptr) {
  Dataset data;
  if (relations) {
    validate_relation_names(*relations);
    data.relation_names = *relations;
  } else {
    data.relation_names = {"NA"};
  }
  std::size_t line_no = 0;
  for (std::string line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no);
    Bag bag;
    std::string relation;
    try {
      const auto j = nlohmann::json::parse(line);
      bag.e1 = j.at("e1").get<std::string>();
      bag.e2 = j.at("e2").get<std::string>();
      relation = j.at("relation").get<std::string>();
      for (const auto& js : j.at("sentences")) {
        ParsedSentence s;
        s.tokens = js.at("tokens").get<std::vector<std::string>>();
        s.heads = js.at("heads").get<std::vector<int>>();
        s.e1_index = js.at("e1_index").get<int>();
        s.e2_index = js.at("e2_index").get<int>();
        if (js.contains("noisy")) s.noisy = js.at("noisy").get<bool>();
        bag.sentences.push_back(std::move(s));
      }
    } catch (const nlohmann::json::exception& e) {
      throw DataError(where + ": malformed bag: " + e.what());
    }
    int rid = data.relation_id(relation);
    if (rid < 0) {
      if (relations) throw DataError(where + ": unknown relation '" + relation + "'");
      data.relation_names.push_back(relation);
      rid = static_cast<int>(data.relation_names.size()) - 1;
    }
    bag.relation_id = rid;
    validate_bag(bag, data.relation_names.size(),
                 where + " (bag " + std::to_string(data.bags.size()) + ")");
    data.bags.push_back(std::move(bag));
  }
  return data;
}

inline Dataset load_corpus(const std::filesystem::path& path,
                           const std::vector<std::string>* relations = nullptr) {
  return parse_corpus(read_file(path), relations);
}

// ---------------------------------------------------------------------------

// Symbol inventory with an unknown symbol at id 0.
class Vocab {
 public:
  explicit Vocab(std::string unk = "<unk>") { add(unk); }

  int add(const std::string& symbol) {
    auto [it, inserted] = index_.emplace(symbol, static_cast<int>(symbols_.size()));
    if (inserted) symbols_.push_back(symbol);
    return it->second;
  }
  int id(const std::string& symbol) const {
    auto it = index_.find(symbol);
    return it == index_.end() ? 0 : it->second;
  }
  bool contains(const std::string& symbol) const { return index_.count(symbol) != 0; }
  const std::string& symbol(int id) const { return symbols_.at(static_cast<std::size_t>(id)); }
  const std::string& unk() const { return symbols_.front(); }
  std::size_t size() const { return symbols_.size(); }
  const std::vector<std::string>& symbols() const { return symbols_; }

  static Vocab from_symbols(const std::vector<std::string>& symbols) {
    if (symbols.empty()) throw DataError("vocabulary without an unknown symbol");
    Vocab v(symbols.front());
    for (std::size_t i = 1; i < symbols.size(); ++i) {
      if (v.contains(symbols[i])) throw DataError("duplicate vocabulary symbol '" + symbols[i] + "'");
      v.add(symbols[i]);
    }
    return v;
  }

  friend bool operator==(const Vocab& a, const Vocab& b) { return a.symbols_ == b.symbols_; }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> index_;
};

// Symbols with count >= min_count, by descending count then lexicographic.
inline Vocab vocab_from_counts(const std::map<std::string, long>& counts, long min_count,
                               std::string unk) {
  std::vector<std::pair<std::string, long>> kept;
  for (const auto& [sym, c] : counts) {
    if (c >= min_count && sym != unk) kept.emplace_back(sym, c);
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocab v(std::move(unk));
  for (const auto& [sym, c] : kept) v.add(sym);
  return v;
}

inline Vocab build_vocab(const Dataset& data, long min_count) {
  std::map<std::string, long> counts;
  for (const Bag& b : data.bags) {
    for (const ParsedSentence& s : b.sentences) {
      for (const auto& t : s.tokens) ++counts[t];
    }
  }
  return vocab_from_counts(counts, min_count, "<unk>");
}

// Clipped relative distance i - p mapped to [0, 2L].
inline int relative_position_bucket(int i, int p, int clip) {
  if (clip < 1) throw std::invalid_argument("position clip must be >= 1");
  return std::clamp(i - p, -clip, clip) + clip;
}

}  // namespace see
