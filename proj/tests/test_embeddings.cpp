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

#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"
#include "see/embeddings.hpp"
#include "see/gradcheck.hpp"
#include "see/trainer.hpp"

namespace see {
namespace {

const std::string kArrow = "\xE2\x86\x92";

std::multiset<ContextPair> as_multiset(const std::vector<ContextPair>& v) { return {v.begin(), v.end()}; }

TEST(DepContexts, ChainGivesGrandparentAndGrandchild) {
  const std::vector<std::string> toks = {"a", "b", "c"};
  const std::vector<int> heads = {-1, 0, 1};
  const auto pairs = as_multiset(extract_dep_contexts(toks, heads));
  const std::string ab = "a" + kArrow + "b";
  EXPECT_EQ(pairs.count({ab, "ROOT" + kArrow + "a"}), 1u);
  EXPECT_EQ(pairs.count({ab, "b" + kArrow + "c"}), 1u);
  std::size_t for_ab = 0;
  for (const auto& p : pairs) for_ab += p.first == ab;
  EXPECT_EQ(for_ab, 2u);
}

TEST(DepContexts, SingleArcTreeIsEmpty) {
  const std::vector<std::string> toks = {"a"};
  EXPECT_TRUE(extract_dep_contexts(toks, std::vector<int>{-1}).empty());
}

// Three leaves attached to the ROOT pseudo-node: no arc has a grandparent or
// a grandchild.
TEST(DepContexts, RootStarIsEmpty) {
  const std::vector<std::string> toks = {"x", "y", "z"};
  EXPECT_TRUE(extract_dep_contexts(toks, std::vector<int>{-1, -1, -1}).empty());
}

TEST(DepContexts, ArcSymbolRendering) {
  EXPECT_EQ(arc_symbol("ROOT", "a"), "ROOT" + kArrow + "a");
  const std::vector<std::string> toks = {"a", "b"};
  EXPECT_EQ(arc_symbol(toks, std::vector<int>{-1, 0}, 1), "a" + kArrow + "b");
}

TEST(DepContexts, AgreesWithPairScanOnRandomTrees) {
  Rng rng = make_rng({21});
  for (int trial = 0; trial < 1500; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 9);
    std::vector<std::string> toks;
    for (std::size_t i = 0; i < n; ++i) toks.push_back("w" + std::to_string(uniform_index(rng, 4)));
    const auto heads = random_tree(n, rng);
    const auto got = as_multiset(extract_dep_contexts(toks, heads));
    const auto want = oracle::dep_contexts(toks, heads);
    ASSERT_EQ(std::multiset<ContextPair>(want.begin(), want.end()), got) << "trial " << trial;
  }
}

TEST(LinearContexts, WindowPairs) {
  const std::vector<std::string> toks = {"a", "b", "c"};
  const auto pairs = as_multiset(extract_linear_contexts(toks, 1));
  EXPECT_EQ(pairs, (std::multiset<ContextPair>{{"a", "b"}, {"b", "a"}, {"b", "c"}, {"c", "b"}}));
}

std::vector<ContextPair> two_cliques() {
  std::vector<ContextPair> pairs;
  for (int i = 0; i < 200; ++i) {
    pairs.push_back({"A", "B"});
    pairs.push_back({"B", "A"});
    pairs.push_back({"C", "D"});
    pairs.push_back({"D", "C"});
  }
  return pairs;
}

TEST(Sgns, CooccurringPairScoresAboveUnseen) {
  SgnsOptions opt;
  opt.dim = 8;
  opt.epochs = 5;
  opt.min_count = 1;
  const auto pairs = two_cliques();
  const SgnsModel m = train_sgns_model(pairs, opt);
  auto score = [&](const std::string& t, const std::string& c) {
    double s = 0.0;
    auto a = m.target.row(static_cast<std::size_t>(m.vocab.id(t)));
    auto b = m.context.row(static_cast<std::size_t>(m.vocab.id(c)));
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return sigmoid(s);
  };
  EXPECT_GT(score("A", "B"), score("A", "C"));
  EXPECT_GT(score("A", "B"), score("A", "D"));
}

TEST(Sgns, ZeroEpochsReturnsInitialisation) {
  SgnsOptions opt;
  opt.dim = 6;
  opt.min_count = 1;
  opt.epochs = 0;
  const auto pairs = two_cliques();
  const EmbeddingTable a = train_sgns(pairs, opt);
  const EmbeddingTable b = train_sgns(pairs, opt);
  EXPECT_EQ(a, b);
  opt.epochs = 1;
  const SgnsModel trained = train_sgns_model(pairs, opt);
  EXPECT_NE(trained.target, a.vectors);
  // Initial targets are the same draw regardless of epoch count.
  opt.epochs = 0;
  EXPECT_EQ(train_sgns_model(pairs, opt).target, a.vectors);
}

TEST(Sgns, FixedNegativeLossNonIncreasingOnHundredPairs) {
  Rng rng = make_rng({8});
  std::vector<ContextPair> pairs;
  for (int i = 0; i < 100; ++i) {
    const int t = static_cast<int>(uniform_index(rng, 10));
    pairs.push_back({"s" + std::to_string(t), "s" + std::to_string((t + 1 + static_cast<int>(uniform_index(rng, 2))) % 10)});
  }
  SgnsOptions opt;
  opt.dim = 10;
  opt.epochs = 30;
  opt.min_count = 1;
  opt.learning_rate = 0.05;
  // Monitoring examples with negatives drawn once.
  std::vector<SgnsExample> monitor;
  std::vector<double> losses;
  opt.on_epoch = [&](int, const SgnsModel& m) {
    if (monitor.empty()) {
      Rng neg = make_rng({9});
      for (const auto& [t, c] : pairs) {
        SgnsExample ex{m.vocab.id(t), m.vocab.id(c), {}};
        for (int k = 0; k < 5; ++k) {
          const int n = 1 + static_cast<int>(uniform_index(neg, m.vocab.size() - 1));
          if (n != ex.context) ex.negatives.push_back(n);
        }
        monitor.push_back(ex);
      }
    }
    losses.push_back(sgns_loss(m.target, m.context, monitor));
  };
  train_sgns_model(pairs, opt);
  ASSERT_EQ(losses.size(), 30u);
  for (std::size_t e = 1; e < losses.size(); ++e) EXPECT_LE(losses[e], losses[e - 1] + 1e-9) << "epoch " << e;
  EXPECT_LT(losses.back(), losses.front());
}

TEST(Sgns, GradientMatchesFiniteDifferences) {
  Rng rng = make_rng({4});
  Tensor t(4, 3), c(4, 3);
  init_uniform(t, rng, 1.0);
  init_uniform(c, rng, 1.0);
  const std::vector<SgnsExample> ex = {{1, 2, {0, 3}}};
  Tensor gt(4, 3), gc(4, 3);
  sgns_accumulate_gradient(t, c, ex[0], 1.0, gt, gc);
  const Tensor nt = finite_difference([&](const Tensor& x) { return sgns_loss(x, c, ex); }, t, 1e-6);
  const Tensor nc = finite_difference([&](const Tensor& x) { return sgns_loss(t, x, ex); }, c, 1e-6);
  for (std::size_t k = 0; k < t.size(); ++k) {
    EXPECT_LT(relative_error(gt[k], nt[k]), 1e-6);
    EXPECT_LT(relative_error(gc[k], nc[k]), 1e-6);
  }
}

TEST(Sgns, DeterministicGivenSeed) {
  SgnsOptions opt;
  opt.dim = 5;
  opt.min_count = 1;
  const auto pairs = two_cliques();
  EXPECT_EQ(train_sgns(pairs, opt), train_sgns(pairs, opt));
}

TEST(Sgns, EmptyVocabularyRejected) {
  SgnsOptions opt;
  opt.min_count = 1000;
  const auto pairs = two_cliques();
  EXPECT_THROW(train_sgns(pairs, opt), DataError);
}

TEST(EmbeddingFile, OneSymbolLayout) {
  EmbeddingTable t{Vocab::from_symbols({"sym"}), Tensor::from(1, 2, {0.0, 1.0})};
  EXPECT_EQ(format_embeddings(t), "1 2\nsym 0 1\n");
}

TEST(EmbeddingFile, RoundTripIsBitExact) {
  Rng rng = make_rng({12});
  Tensor v(4, 7);
  for (double& x : v.data()) x = uniform(rng, -1, 1) * std::pow(10.0, uniform_int(rng, -30, 30));
  EmbeddingTable t{Vocab::from_symbols({"<unk>", "a", "b" + kArrow + "c", "d"}), v};
  EXPECT_EQ(parse_embeddings(format_embeddings(t)), t);
}

TEST(EmbeddingFile, MalformedRejected) {
  EXPECT_THROW(parse_embeddings("2 2\na 1 2\n"), DataError);
  EXPECT_THROW(parse_embeddings("1 2\na 1 x\n"), DataError);
  EXPECT_THROW(parse_embeddings("1 3\na 1 2\n"), DataError);
}

TEST(EmbeddingFile, DimensionMismatchReportsBothDims) {
  Rng rng = make_rng({1});
  const Dataset data = toy_dataset(2, 3, rng);
  TrainConfig cfg = toy_config(Strategy::kBaseline, 1);
  cfg.d_word = 80;
  EmbeddingTable t{Vocab::from_symbols({"<unk>", "t1"}), Tensor(std::size_t{2}, std::size_t{50})};
  TrainOptions opt;
  opt.word_embeddings = &t;
  try {
    initial_model(data, cfg, opt);
    FAIL();
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("50"), std::string::npos);
    EXPECT_NE(msg.find("80"), std::string::npos);
  }
}

TEST(EmbeddingFile, PretrainedRowsCopiedIntoModel) {
  Rng rng = make_rng({2});
  const Dataset data = toy_dataset(2, 3, rng);
  TrainConfig cfg = toy_config(Strategy::kBaseline, 1);
  Model m = make_model(cfg, data.relation_names, build_vocab(data, 1), build_arc_vocab(data, 1));
  const std::string word = m.words.symbol(1);
  EmbeddingTable t{Vocab::from_symbols({"<unk>", word, "absent"}), Tensor::from(3, 3, {0, 0, 0, 1, 2, 3, 4, 5, 6})};
  EXPECT_EQ(apply_pretrained(m, "emb.word", m.words, t), 2u);  // <unk> and the word
  const auto row = m.params.at("emb.word").value.row(1);
  EXPECT_EQ(std::vector<double>(row.begin(), row.end()), (std::vector<double>{1, 2, 3}));
}

}  // namespace
}  // namespace see
