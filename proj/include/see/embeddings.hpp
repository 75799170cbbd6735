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

// Embedding tables, dependency/linear context extraction and
// skip-gram-with-negative-sampling pretraining.
#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "see/corpus.hpp"
#include "see/io.hpp"
#include "see/numerics.hpp"

namespace see {

inline constexpr const char* kArcSeparator = "\xE2\x86\x92";  // U+2192
inline constexpr const char* kRootWord = "ROOT";

inline std::string arc_symbol(const std::string& head, const std::string& child) {
  return head + kArcSeparator + child;
}

// Symbol for the arc entering token i ("ROOT→w" for the root).
inline std::string arc_symbol(std::span<const std::string> tokens, std::span<const int> heads,
                              std::size_t i) {
  const int h = heads[i];
  return arc_symbol(h < 0 ? std::string(kRootWord) : tokens[static_cast<std::size_t>(h)], tokens[i]);
}

using ContextPair = std::pair<std::string, std::string>;

// For each arc p→c: (p→c, gp→p) when p is a token (gp may be ROOT), and
// (p→c, c→gc) for every child gc of c. Works on any acyclic head vector,
// including forests with several ROOT attachments.
inline std::vector<ContextPair> extract_dep_contexts(std::span<const std::string> tokens,
                                                     std::span<const int> heads) {
  const auto children = children_of(heads);
  std::vector<ContextPair> out;
  for (std::size_t c = 0; c < tokens.size(); ++c) {
    const std::string target = arc_symbol(tokens, heads, c);
    if (heads[c] >= 0) {
      out.emplace_back(target, arc_symbol(tokens, heads, static_cast<std::size_t>(heads[c])));
    }
    for (int gc : children[c]) {
      out.emplace_back(target, arc_symbol(tokens, heads, static_cast<std::size_t>(gc)));
    }
  }
  return out;
}

inline std::vector<ContextPair> extract_dep_contexts(const ParsedSentence& s) {
  return extract_dep_contexts(s.tokens, s.heads);
}

// (w_i, w_j) for 0 < |i - j| <= window.
inline std::vector<ContextPair> extract_linear_contexts(std::span<const std::string> tokens,
                                                        int window) {
  std::vector<ContextPair> out;
  const int n = static_cast<int>(tokens.size());
  for (int i = 0; i < n; ++i) {
    for (int j = std::max(0, i - window); j <= std::min(n - 1, i + window); ++j) {
      if (j != i) out.emplace_back(tokens[static_cast<std::size_t>(i)], tokens[static_cast<std::size_t>(j)]);
    }
  }
  return out;
}

inline std::vector<ContextPair> corpus_dep_contexts(const Dataset& data) {
  std::vector<ContextPair> out;
  for (const Bag& b : data.bags) {
    for (const ParsedSentence& s : b.sentences) {
      auto p = extract_dep_contexts(s);
      out.insert(out.end(), p.begin(), p.end());
    }
  }
  return out;
}

inline std::vector<ContextPair> corpus_linear_contexts(const Dataset& data, int window) {
  std::vector<ContextPair> out;
  for (const Bag& b : data.bags) {
    for (const ParsedSentence& s : b.sentences) {
      auto p = extract_linear_contexts(s.tokens, window);
      out.insert(out.end(), p.begin(), p.end());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

// Symbol -> vector lookup. Row 0 is the unknown symbol.
struct EmbeddingTable {
  Vocab vocab;
  Tensor vectors;  // vocab.size() x dim

  std::size_t dim() const { return vectors.cols(); }
  std::span<const double> lookup(const std::string& symbol) const {
    return vectors.row(static_cast<std::size_t>(vocab.id(symbol)));
  }

  friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;
};

inline std::string format_embeddings(const EmbeddingTable& t) {
  std::string out = std::to_string(t.vocab.size()) + " " + std::to_string(t.dim()) + "\n";
  for (std::size_t i = 0; i < t.vocab.size(); ++i) {
    out += t.vocab.symbol(static_cast<int>(i));
    for (double v : t.vectors.row(i)) out += " " + format_double(v);
    out += "\n";
  }
  return out;
}

inline void save_embeddings(const EmbeddingTable& t, const std::filesystem::path& path) {
  write_file_atomic(path, format_embeddings(t));
}

inline EmbeddingTable parse_embeddings(std::string_view text) {
  auto lines = split(text, '\n');
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw DataError("embedding file is empty");
  auto header = split(lines[0], ' ');
  std::size_t count = 0, dim = 0;
  try {
    if (header.size() != 2) throw std::invalid_argument("header");
    count = std::stoul(header[0]);
    dim = std::stoul(header[1]);
  } catch (const std::exception&) {
    throw DataError("embedding header must be \"count dim\", got '" + lines[0] + "'");
  }
  if (dim == 0 || count == 0) throw DataError("embedding file declares an empty table");
  if (lines.size() - 1 != count) {
    throw DataError("embedding file declares " + std::to_string(count) + " rows but has " +
                    std::to_string(lines.size() - 1));
  }
  std::vector<std::string> symbols;
  Tensor vectors(count, dim);
  for (std::size_t r = 0; r < count; ++r) {
    auto f = split(lines[r + 1], ' ');
    if (f.size() != dim + 1) {
      throw DataError("embedding line " + std::to_string(r + 2) + " has " +
                      std::to_string(f.size() - 1) + " values, expected " + std::to_string(dim));
    }
    symbols.push_back(f[0]);
    for (std::size_t k = 0; k < dim; ++k) {
      char* end = nullptr;
      const double v = std::strtod(f[k + 1].c_str(), &end);
      if (end == f[k + 1].c_str() || *end != '\0') {
        throw DataError("embedding line " + std::to_string(r + 2) + ": bad number '" + f[k + 1] + "'");
      }
      vectors.at(r, k) = v;
    }
  }
  return {Vocab::from_symbols(symbols), std::move(vectors)};
}

inline EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  return parse_embeddings(read_file(path));
}

// ---------------------------------------------------------------------------
// Skip-gram with negative sampling.

// Target (input) and context (output) vectors over one vocabulary.
struct SgnsModel {
  Vocab vocab;
  Tensor target;
  Tensor context;
};

struct SgnsOptions {
  std::size_t dim = 50;
  int negatives = 5;
  int epochs = 5;
  double learning_rate = 0.025;  // decayed linearly to 1e-4 of itself
  long min_count = 5;
  std::size_t table_size = 100000;
  std::uint64_t seed = 1;
  std::string unk = "<unk>";
  // Called after each epoch with the epoch index (0-based).
  std::function<void(int, const SgnsModel&)> on_epoch;
};

// One training example: target id, positive context id, negative ids.
struct SgnsExample {
  int target = 0;
  int context = 0;
  std::vector<int> negatives;
};

// -[log σ(t·c) + Σ_j log σ(-t·n_j)] summed over examples.
inline double sgns_loss(const Tensor& target, const Tensor& context,
                        std::span<const SgnsExample> examples) {
  auto dot = [&](int t, int c) {
    double s = 0.0;
    auto a = target.row(static_cast<std::size_t>(t));
    auto b = context.row(static_cast<std::size_t>(c));
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  };
  auto log_sigmoid = [](double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); };
  double loss = 0.0;
  for (const auto& ex : examples) {
    loss -= log_sigmoid(dot(ex.target, ex.context));
    for (int n : ex.negatives) loss -= log_sigmoid(-dot(ex.target, n));
  }
  return loss;
}

// Adds scale * d(loss)/d(vectors) for one example into the gradient buffers.
// The trainer passes scale = -lr with the live tables as buffers, which is an
// in-place SGD update.
inline void sgns_accumulate_gradient(const Tensor& target, const Tensor& context,
                                     const SgnsExample& ex, double scale, Tensor& g_target,
                                     Tensor& g_context) {
  const auto t = target.row(static_cast<std::size_t>(ex.target));
  const std::size_t dim = t.size();
  std::vector<double> gt(dim, 0.0);
  auto step = [&](int c, double label) {
    auto u = context.row(static_cast<std::size_t>(c));
    double s = 0.0;
    for (std::size_t i = 0; i < dim; ++i) s += t[i] * u[i];
    // d/ds of -log σ(±s) is σ(s) - label.
    const double coeff = see::sigmoid(s) - label;
    auto gu = g_context.row(static_cast<std::size_t>(c));
    for (std::size_t i = 0; i < dim; ++i) {
      gt[i] += coeff * u[i];
      gu[i] += scale * coeff * t[i];
    }
  };
  step(ex.context, 1.0);
  for (int n : ex.negatives) step(n, 0.0);
  auto gtr = g_target.row(static_cast<std::size_t>(ex.target));
  for (std::size_t i = 0; i < dim; ++i) gtr[i] += scale * gt[i];
}

namespace detail {

inline std::vector<int> unigram_table(const Vocab& vocab, const std::vector<long>& counts,
                                      std::size_t size) {
  double total = 0.0;
  for (std::size_t i = 1; i < vocab.size(); ++i) total += std::pow(static_cast<double>(counts[i]), 0.75);
  std::vector<int> table;
  table.reserve(size);
  std::size_t sym = 1;
  double cum = std::pow(static_cast<double>(counts[1]), 0.75) / total;
  for (std::size_t a = 0; a < size; ++a) {
    table.push_back(static_cast<int>(sym));
    if (static_cast<double>(a + 1) / static_cast<double>(size) > cum && sym + 1 < vocab.size()) {
      ++sym;
      cum += std::pow(static_cast<double>(counts[sym]), 0.75) / total;
    }
  }
  return table;
}

}  // namespace detail

// Trains target/context vectors. Symbols below min_count map to the unknown
// symbol and pairs touching it are skipped.
inline SgnsModel train_sgns_model(std::span<const ContextPair> pairs, const SgnsOptions& opt) {
  if (opt.dim == 0) throw std::invalid_argument("SGNS dimension must be positive");
  std::map<std::string, long> counts;
  for (const auto& [t, c] : pairs) {
    ++counts[t];
    ++counts[c];
  }
  SgnsModel m{vocab_from_counts(counts, opt.min_count, opt.unk), {}, {}};
  if (m.vocab.size() <= 1) throw DataError("SGNS vocabulary is empty (min_count " + std::to_string(opt.min_count) + ")");

  std::vector<long> freq(m.vocab.size(), 0);
  std::vector<std::pair<int, int>> ids;
  ids.reserve(pairs.size());
  for (const auto& [t, c] : pairs) {
    const int ti = m.vocab.id(t), ci = m.vocab.id(c);
    if (ti == 0 || ci == 0) continue;
    ids.emplace_back(ti, ci);
    ++freq[static_cast<std::size_t>(ci)];
  }
  for (std::size_t i = 1; i < freq.size(); ++i) freq[i] = std::max(freq[i], 1L);

  Rng rng = make_rng({opt.seed, 0x73676e73ull});
  m.target = Tensor(m.vocab.size(), opt.dim);
  m.context = Tensor(m.vocab.size(), opt.dim);
  init_uniform(m.target, rng, 0.5 / static_cast<double>(opt.dim));
  if (ids.empty() || opt.epochs <= 0) return m;

  const auto table = detail::unigram_table(m.vocab, freq, opt.table_size);
  const double total_steps = static_cast<double>(opt.epochs) * static_cast<double>(ids.size());
  double step = 0.0;
  SgnsExample ex;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    Rng erng = make_rng({opt.seed, static_cast<std::uint64_t>(epoch), 0x65706f63ull});
    shuffle_in_place(std::span(ids), erng);
    for (const auto& [t, c] : ids) {
      const double lr = opt.learning_rate * std::max(1e-4, 1.0 - step / total_steps);
      step += 1.0;
      ex.target = t;
      ex.context = c;
      ex.negatives.clear();
      for (int k = 0; k < opt.negatives; ++k) {
        const int n = table[uniform_index(erng, table.size())];
        if (n != c) ex.negatives.push_back(n);
      }
      sgns_accumulate_gradient(m.target, m.context, ex, -lr, m.target, m.context);
    }
    if (opt.on_epoch) opt.on_epoch(epoch, m);
  }
  return m;
}

inline EmbeddingTable train_sgns(std::span<const ContextPair> pairs, const SgnsOptions& opt) {
  SgnsModel m = train_sgns_model(pairs, opt);
  return {std::move(m.vocab), std::move(m.target)};
}

}  // namespace see
