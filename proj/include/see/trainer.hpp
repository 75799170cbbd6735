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

// Mini-batch SGD training and checkpoint files.
#pragma once

#include <bit>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "see/bag_classifier.hpp"
#include "see/config.hpp"
#include "see/corpus.hpp"
#include "see/embeddings.hpp"
#include "see/io.hpp"
#include "see/model.hpp"

namespace see {

static_assert(std::endian::native == std::endian::little,
              "checkpoint payloads are written in host byte order");

// ---------------------------------------------------------------------------
// Checkpoint layout:
//   "SEECKPT1\n" <one-line JSON header> "\n" <fp64 payload>
// The header carries the config, relation names, both vocabularies and a
// tensor directory {name, shape, offset} with offsets counted in doubles.

inline constexpr std::string_view kCheckpointMagic = "SEECKPT1\n";

inline std::string format_checkpoint(const Model& m) {
  nlohmann::ordered_json header;
  header["format"] = 1;
  nlohmann::json cfg;
  to_json(cfg, m.config);
  header["config"] = cfg;
  header["relations"] = m.relations;
  header["words"] = m.words.symbols();
  header["arcs"] = m.arcs.symbols();
  auto& dir = header["tensors"] = nlohmann::ordered_json::array();
  std::size_t offset = 0;
  for (const auto& [name, p] : m.params) {
    dir.push_back({{"name", name}, {"shape", p.value.shape()}, {"offset", offset}});
    offset += p.value.size();
  }
  header["total"] = offset;
  std::string out(kCheckpointMagic);
  out += header.dump();
  out += "\n";
  const std::size_t start = out.size();
  out.resize(start + offset * sizeof(double));
  char* dst = out.data() + start;
  for (const auto& [name, p] : m.params) {
    std::memcpy(dst, p.value.data().data(), p.value.size() * sizeof(double));
    dst += p.value.size() * sizeof(double);
  }
  return out;
}

inline void save_checkpoint(const Model& m, const std::filesystem::path& path) {
  write_file_atomic(path, format_checkpoint(m));
}

// With `expected`, the checkpoint must carry every tensor that strategy
// needs.
inline Model parse_checkpoint(std::string_view bytes, std::optional<Strategy> expected = std::nullopt) {
  if (bytes.substr(0, kCheckpointMagic.size()) != kCheckpointMagic) {
    throw DataError("not a checkpoint (bad magic)");
  }
  const std::size_t eol = bytes.find('\n', kCheckpointMagic.size());
  if (eol == std::string_view::npos) throw DataError("checkpoint header is truncated");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(kCheckpointMagic.size(), eol - kCheckpointMagic.size()));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint header: ") + e.what());
  }
  Model m;
  try {
    from_json(header.at("config"), m.config);
    m.relations = header.at("relations").get<std::vector<std::string>>();
    m.words = Vocab::from_symbols(header.at("words").get<std::vector<std::string>>());
    m.arcs = Vocab::from_symbols(header.at("arcs").get<std::vector<std::string>>());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint header: ") + e.what());
  }
  validate(m.config);
  if (expected && *expected != m.config.strategy) {
    TrainConfig want = m.config;
    want.strategy = *expected;
    std::set<std::string> have;
    for (const auto& t : header.at("tensors")) have.insert(t.at("name").get<std::string>());
    for (const auto& spec : param_layout(want, m.relations.size(), m.words.size(), m.arcs.size())) {
      if (!have.count(spec.name)) {
        throw DataError("checkpoint trained with strategy " + to_string(m.config.strategy) +
                        " lacks parameter '" + spec.name + "' required by strategy " +
                        to_string(*expected));
      }
    }
    throw DataError("checkpoint strategy " + to_string(m.config.strategy) + " does not match " +
                    to_string(*expected));
  }
  std::map<std::string, std::vector<std::size_t>> layout;
  for (const auto& spec : param_layout(m.config, m.relations.size(), m.words.size(), m.arcs.size())) {
    layout[spec.name] = spec.shape;
  }
  const std::size_t payload = bytes.size() - eol - 1;
  const std::size_t total = header.at("total").get<std::size_t>();
  if (payload != total * sizeof(double)) {
    throw DataError("checkpoint payload has " + std::to_string(payload) + " bytes, header promises " +
                    std::to_string(total * sizeof(double)));
  }
  const char* base = bytes.data() + eol + 1;
  for (const auto& t : header.at("tensors")) {
    const auto name = t.at("name").get<std::string>();
    const auto shape = t.at("shape").get<std::vector<std::size_t>>();
    const auto offset = t.at("offset").get<std::size_t>();
    auto it = layout.find(name);
    if (it == layout.end()) throw DataError("checkpoint has unknown parameter '" + name + "'");
    if (it->second != shape) throw DataError("checkpoint parameter '" + name + "' has the wrong shape");
    Tensor v = zeros(shape);
    if ((offset + v.size()) > total) throw DataError("checkpoint parameter '" + name + "' overruns payload");
    std::memcpy(v.data().data(), base + offset * sizeof(double), v.size() * sizeof(double));
    m.params.add(name, std::move(v));
    layout.erase(it);
  }
  if (!layout.empty()) throw DataError("checkpoint lacks parameter '" + layout.begin()->first + "'");
  return m;
}

inline Model load_checkpoint(const std::filesystem::path& path,
                             std::optional<Strategy> expected = std::nullopt) {
  return parse_checkpoint(read_file(path), expected);
}

// ---------------------------------------------------------------------------

struct EpochLog {
  int epoch = 0;  // 1-based
  double mean_loss = 0.0;
  double seconds = 0.0;
};

inline std::string format_train_log(const std::vector<EpochLog>& log) {
  std::string out = "epoch,mean_loss,seconds\n";
  for (const auto& e : log) {
    out += std::to_string(e.epoch) + "," + format_double(e.mean_loss) + "," + format_double(e.seconds) + "\n";
  }
  return out;
}

struct TrainOptions {
  const EmbeddingTable* word_embeddings = nullptr;
  const EmbeddingTable* dep_embeddings = nullptr;
  // When set, epoch_<e>.ckpt is written after every epoch.
  std::optional<std::filesystem::path> checkpoint_dir;
  std::function<void(const EpochLog&)> on_epoch;
};

struct TrainResult {
  Model model;  // lowest mean training loss over epochs (the initialisation for 0 epochs)
  std::vector<EpochLog> log;
  int best_epoch = 0;
};

// Model with vocabularies built from `data` and pretrained rows copied in.
inline Model initial_model(const Dataset& data, const TrainConfig& config,
                           const TrainOptions& options = {}) {
  validate(config);
  if (options.word_embeddings && options.word_embeddings->dim() != static_cast<std::size_t>(config.d_word)) {
    throw DataError("word embedding dimension mismatch: file has " +
                    std::to_string(options.word_embeddings->dim()) + ", model expects " +
                    std::to_string(config.d_word));
  }
  if (options.dep_embeddings && options.dep_embeddings->dim() != static_cast<std::size_t>(config.d_dep)) {
    throw DataError("dependency embedding dimension mismatch: file has " +
                    std::to_string(options.dep_embeddings->dim()) + ", model expects " +
                    std::to_string(config.d_dep));
  }
  Model m = make_model(config, data.relation_names, build_vocab(data, config.word_min_count),
                       build_arc_vocab(data, config.dep_min_count));
  if (options.word_embeddings) apply_pretrained(m, "emb.word", m.words, *options.word_embeddings);
  if (options.dep_embeddings && uses_entities(config.strategy)) {
    apply_pretrained(m, "emb.dep", m.arcs, *options.dep_embeddings);
  }
  return m;
}

inline TrainResult train(const Dataset& data, const TrainConfig& config,
                         const TrainOptions& options = {}) {
  if (data.bags.empty()) throw DataError("training corpus has no bags");
  TrainResult result{initial_model(data, config, options), {}, 0};
  Model model = result.model;
  const std::vector<EncodedBag> bags = encode(model, data);
  std::vector<std::size_t> order(bags.size());
  double best = std::numeric_limits<double>::infinity();

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle_rng = make_rng({config.seed, static_cast<std::uint64_t>(epoch), 0x73687566ull});
    shuffle_in_place(std::span(order), shuffle_rng);

    double loss_sum = 0.0;
    const std::size_t bs = static_cast<std::size_t>(config.batch_size);
    for (std::size_t b0 = 0, batch = 0; b0 < order.size(); b0 += bs, ++batch) {
      std::vector<EncodedBag> chunk;
      for (std::size_t i = b0; i < std::min(order.size(), b0 + bs); ++i) chunk.push_back(bags[order[i]]);
      Rng drop_rng = make_rng({config.seed, static_cast<std::uint64_t>(epoch), batch, 0x64726f70ull});
      double loss;
      try {
        loss = bag_loss(chunk, model, config.strategy, config.dropout_rate, &drop_rng, true);
        sgd_step(model.params, config.learning_rate);
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch + 1) + ", batch " + std::to_string(batch) +
                           ": " + e.what());
      }
      loss_sum += loss * static_cast<double>(chunk.size());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    EpochLog entry{epoch + 1, loss_sum / static_cast<double>(bags.size()), seconds};
    result.log.push_back(entry);
    if (options.checkpoint_dir) {
      save_checkpoint(model, *options.checkpoint_dir / ("epoch_" + std::to_string(epoch + 1) + ".ckpt"));
    }
    if (entry.mean_loss < best) {
      best = entry.mean_loss;
      result.model = model;
      result.best_epoch = epoch + 1;
    }
    if (options.on_epoch) options.on_epoch(entry);
  }
  return result;
}

}  // namespace see
