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

#pragma once

#include <algorithm>
#include <cstdint>
#include <string>

#include <json.hpp>

#include "see/errors.hpp"

namespace see {

enum class Strategy { kBaseline, kCat, kTrans };

inline std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::kBaseline: return "baseline";
    case Strategy::kCat: return "cat";
    case Strategy::kTrans: return "trans";
  }
  return "?";
}

inline Strategy parse_strategy(const std::string& s) {
  if (s == "baseline") return Strategy::kBaseline;
  if (s == "cat") return Strategy::kCat;
  if (s == "trans") return Strategy::kTrans;
  throw DataError("unknown strategy '" + s + "' (expected baseline, cat or trans)");
}

inline bool uses_entities(Strategy s) { return s != Strategy::kBaseline; }

struct TrainConfig {
  double learning_rate = 0.2;
  int batch_size = 150;
  int d_word = 50;
  int d_dep = 50;
  int d_pos = 5;
  int window = 3;
  int filters = 240;
  int hidden = 100;
  Strategy strategy = Strategy::kTrans;
  double dropout_rate = 0.5;
  int epochs = 15;
  std::uint64_t seed = 1;
  int position_clip = 30;
  int word_min_count = 1;
  int dep_min_count = 5;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// lr 0.2, batch 150, word/dep dims 50/50, position dim 5, window 3, 240 filters.
inline TrainConfig default_config() { return TrainConfig{}; }

inline void validate(const TrainConfig& c) {
  auto bad = [](const std::string& m) { throw DataError("invalid train config: " + m); };
  if (!(c.learning_rate > 0.0)) bad("learning_rate must be positive");
  if (c.batch_size < 1) bad("batch_size must be positive");
  if (c.d_word < 1 || c.d_dep < 1 || c.d_pos < 1) bad("embedding dimensions must be positive");
  if (c.window < 1 || c.filters < 1 || c.hidden < 1) bad("window, filters and hidden must be positive");
  if (!(c.dropout_rate >= 0.0 && c.dropout_rate < 1.0)) bad("dropout_rate must lie in [0, 1)");
  if (c.epochs < 0) bad("epochs must be non-negative");
  if (c.position_clip < 1) bad("position_clip must be positive");
  if (c.word_min_count < 1 || c.dep_min_count < 1) bad("min counts must be positive");
}

inline void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"learning_rate", c.learning_rate},
                     {"batch_size", c.batch_size},
                     {"d_word", c.d_word},
                     {"d_dep", c.d_dep},
                     {"d_pos", c.d_pos},
                     {"window", c.window},
                     {"filters", c.filters},
                     {"hidden", c.hidden},
                     {"strategy", to_string(c.strategy)},
                     {"dropout_rate", c.dropout_rate},
                     {"epochs", c.epochs},
                     {"seed", c.seed},
                     {"position_clip", c.position_clip},
                     {"word_min_count", c.word_min_count},
                     {"dep_min_count", c.dep_min_count}};
}

// Missing keys keep their current values; unknown keys are rejected.
inline void from_json(const nlohmann::json& j, TrainConfig& c) {
  nlohmann::json ref;
  to_json(ref, c);
  for (const auto& [key, value] : j.items()) {
    if (!ref.contains(key)) throw DataError("unknown train config key '" + key + "'");
  }
  auto get = [&](const char* k, auto& field) {
    if (j.contains(k)) j.at(k).get_to(field);
  };
  get("learning_rate", c.learning_rate);
  get("batch_size", c.batch_size);
  get("d_word", c.d_word);
  get("d_dep", c.d_dep);
  get("d_pos", c.d_pos);
  get("window", c.window);
  get("filters", c.filters);
  get("hidden", c.hidden);
  if (j.contains("strategy")) c.strategy = parse_strategy(j.at("strategy").get<std::string>());
  get("dropout_rate", c.dropout_rate);
  get("epochs", c.epochs);
  get("seed", c.seed);
  get("position_clip", c.position_clip);
  get("word_min_count", c.word_min_count);
  get("dep_min_count", c.dep_min_count);
}

}  // namespace see
