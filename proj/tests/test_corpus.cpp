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

#include <filesystem>
#include <set>

#include "oracles.hpp"
#include "see/corpus.hpp"
#include "see/synth.hpp"

namespace see {
namespace {

namespace fs = std::filesystem;

TEST(ValidateTree, RootWithTwoChildren) { EXPECT_FALSE(validate_tree(std::vector<int>{-1, 0, 0})); }

TEST(ValidateTree, TwoCycleNamed) {
  const auto err = validate_tree(std::vector<int>{1, 0});
  ASSERT_TRUE(err);
  EXPECT_EQ(*err, "cycle between tokens 0 and 1");
}

TEST(ValidateTree, TwoRootsNamed) {
  const auto err = validate_tree(std::vector<int>{-1, -1});
  ASSERT_TRUE(err);
  EXPECT_NE(err->find("multiple roots"), std::string::npos);
  EXPECT_NE(err->find("0 and 1"), std::string::npos);
}

TEST(ValidateTree, OutOfRangeHeadNamesToken) {
  const auto err = validate_tree(std::vector<int>{-1, 7});
  ASSERT_TRUE(err);
  EXPECT_NE(err->find("1"), std::string::npos);
}

// Every head vector of length 1..6 over {-1, ..., n} against the chain-walk
// oracle.
TEST(ValidateTree, ExhaustiveAgreementWithChainWalk) {
  std::size_t checked = 0;
  for (int n = 1; n <= 6; ++n) {
    std::vector<int> heads(static_cast<std::size_t>(n), -1);
    while (true) {
      EXPECT_EQ(!validate_tree(heads).has_value(), oracle::valid_tree(heads));
      ++checked;
      int i = 0;
      while (i < n && heads[static_cast<std::size_t>(i)] == n) heads[static_cast<std::size_t>(i++)] = -1;
      if (i == n) break;
      ++heads[static_cast<std::size_t>(i)];
    }
  }
  EXPECT_GT(checked, 100000u);
}

const char* kOneBag =
    R"({"e1":"a","e2":"c","relation":"born_in","sentences":[{"tokens":["a","b","c"],"heads":[1,-1,1],"e1_index":0,"e2_index":2}]})";

TEST(LoadCorpus, SingleBag) {
  const Dataset d = parse_corpus(kOneBag);
  ASSERT_EQ(d.bags.size(), 1u);
  EXPECT_EQ(d.sentence_count(), 1u);
  EXPECT_EQ(d.relation_names, (std::vector<std::string>{"NA", "born_in"}));
  EXPECT_EQ(d.bags[0].relation_id, 1);
  EXPECT_FALSE(d.bags[0].sentences[0].noisy);
}

TEST(LoadCorpus, SameEntityIndexRejected) {
  const std::string line =
      R"({"e1":"a","e2":"a","relation":"NA","sentences":[{"tokens":["a","b"],"heads":[1,-1],"e1_index":0,"e2_index":0}]})";
  EXPECT_THROW(parse_corpus(line), DataError);
}

TEST(LoadCorpus, MalformedLineReportsLineNumber) {
  const std::string text = std::string(kOneBag) + "\n{not json\n";
  try {
    parse_corpus(text);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(LoadCorpus, InvariantViolationReportsBag) {
  const std::string bad =
      R"({"e1":"a","e2":"c","relation":"NA","sentences":[{"tokens":["a","b","c"],"heads":[1,0,1],"e1_index":0,"e2_index":2}]})";
  try {
    parse_corpus(std::string(kOneBag) + "\n" + bad);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("bag 1"), std::string::npos);
  }
}

TEST(LoadCorpus, EntityTokenMismatchRejected) {
  const std::string bad =
      R"({"e1":"a","e2":"c","relation":"NA","sentences":[{"tokens":["x","b","c"],"heads":[1,-1,1],"e1_index":0,"e2_index":2}]})";
  EXPECT_THROW(parse_corpus(bad), DataError);
}

TEST(LoadCorpus, UnknownRelationRejectedWithInventory) {
  const std::vector<std::string> inv = {"NA", "founded"};
  EXPECT_THROW(parse_corpus(kOneBag, &inv), DataError);
}

TEST(LoadCorpus, InventoryRequiresNA) {
  EXPECT_THROW(parse_relations("a\nb\n"), DataError);
  EXPECT_EQ(parse_relations("NA\nb\n"), (std::vector<std::string>{"NA", "b"}));
}

TEST(LoadCorpus, SaveThenLoadIsIdentity) {
  SynthConfig c;
  c.n_entity_pairs = 30;
  c.n_test_pairs = 5;
  c.noise_rate = 0.3;
  const Dataset d = generate_synthetic(c).train;
  const fs::path dir = fs::temp_directory_path() / "see_corpus_roundtrip";
  fs::remove_all(dir);
  save_corpus(d, dir / "c.jsonl");
  EXPECT_EQ(load_corpus(dir / "c.jsonl", &d.relation_names), d);
  fs::remove_all(dir);
}

TEST(Synthetic, NoNoiseMeansAllClean) {
  SynthConfig c;
  const auto corpus = generate_synthetic(c);
  for (const auto& b : corpus.train.bags) {
    for (const auto& s : b.sentences) EXPECT_EQ(s.noisy, std::optional<bool>(false));
  }
}

TEST(Synthetic, NoiseFractionNearRate) {
  SynthConfig c;
  c.noise_rate = 0.3;
  c.n_entity_pairs = 2900;  // ~10^4 sentences at mean bag size 3.5
  c.n_test_pairs = 5;
  const auto corpus = generate_synthetic(c);
  std::size_t noisy = 0, total = 0;
  for (const auto& b : corpus.train.bags) {
    ASSERT_GE(b.sentences.size(), 2u);
    for (const auto& s : b.sentences) {
      noisy += *s.noisy;
      ++total;
    }
  }
  EXPECT_GE(total, 10000u);
  EXPECT_NEAR(static_cast<double>(noisy) / static_cast<double>(total), 0.3, 0.02);
}

TEST(Synthetic, EveryMultiSentenceBagKeepsACleanSentence) {
  SynthConfig c;
  c.noise_rate = 0.9;
  for (const auto& b : generate_synthetic(c).train.bags) {
    bool clean = false;
    for (const auto& s : b.sentences) clean = clean || !*s.noisy;
    EXPECT_TRUE(clean);
  }
}

TEST(Synthetic, SameSeedByteIdentical) {
  SynthConfig c;
  c.noise_rate = 0.3;
  const auto a = generate_synthetic(c), b = generate_synthetic(c);
  EXPECT_EQ(format_corpus(a.train), format_corpus(b.train));
  EXPECT_EQ(format_corpus(a.test), format_corpus(b.test));
  c.seed = 2;
  EXPECT_NE(format_corpus(generate_synthetic(c).train), format_corpus(a.train));
}

TEST(Synthetic, SplitsShareNoEntityPair) {
  const auto corpus = generate_synthetic(SynthConfig{});
  std::set<std::pair<std::string, std::string>> train;
  for (const auto& b : corpus.train.bags) train.insert({b.e1, b.e2});
  for (const auto& b : corpus.test.bags) EXPECT_FALSE(train.count({b.e1, b.e2}));
  EXPECT_EQ(corpus.test.bags.size(), 200u);
  EXPECT_EQ(corpus.train.bags.size(), 600u);
}

TEST(Synthetic, ClassesUniformAndSentencesValid) {
  const auto corpus = generate_synthetic(SynthConfig{});
  std::vector<int> counts(5, 0);
  for (const auto& b : corpus.train.bags) {
    ++counts[static_cast<std::size_t>(b.relation_id)];
    EXPECT_NO_THROW(validate_bag(b, 5, "synthetic"));
  }
  for (int c : counts) EXPECT_EQ(c, 120);
}

TEST(Synthetic, InfeasibleConfigRejected) {
  SynthConfig c;
  c.bag_size_min = 4;
  c.bag_size_max = 2;
  EXPECT_THROW(generate_synthetic(c), DataError);
  c = SynthConfig{};
  c.noise_rate = 1.0;
  EXPECT_THROW(generate_synthetic(c), DataError);
  c = SynthConfig{};
  c.sentence_length_min = 3;
  EXPECT_THROW(generate_synthetic(c), DataError);
}

// Paired relations share words; only the attachment of modifiers differs.
TEST(Synthetic, PairedRelationsDifferOnlyInAttachment) {
  SynthConfig c;
  c.trigger_prob = 0.0;
  const auto corpus = generate_synthetic(c);
  std::map<int, std::set<std::string>> words_by_rel;
  for (const auto& b : corpus.train.bags) {
    for (const auto& s : b.sentences) {
      for (const auto& t : s.tokens) {
        if (t.rfind("mod", 0) == 0) words_by_rel[b.relation_id].insert(t);
      }
    }
  }
  EXPECT_EQ(words_by_rel[1], words_by_rel[2]);
  EXPECT_EQ(words_by_rel[3], words_by_rel[4]);
}

Dataset tiny_dataset(const std::vector<std::vector<std::string>>& sentences) {
  Dataset d;
  d.relation_names = {"NA"};
  for (const auto& toks : sentences) {
    Bag b{toks[0], toks[1], 0, {}};
    ParsedSentence s{toks, std::vector<int>(toks.size(), 0), 0, 1, std::nullopt};
    s.heads[0] = -1;
    b.sentences.push_back(s);
    d.bags.push_back(b);
  }
  return d;
}

TEST(Vocab, CountThenLexicographicOrder) {
  const Dataset d = tiny_dataset({{"a", "a", "b"}});
  const Vocab v = build_vocab(d, 1);
  EXPECT_EQ(v.id("<unk>"), 0);
  EXPECT_EQ(v.id("a"), 1);
  EXPECT_EQ(v.id("b"), 2);
}

TEST(Vocab, MinCountDropsRareWords) {
  const Vocab v = build_vocab(tiny_dataset({{"a", "a", "b"}}), 2);
  EXPECT_TRUE(v.contains("a"));
  EXPECT_EQ(v.id("b"), 0);
}

TEST(Vocab, InsensitiveToBagOrder) {
  Rng rng = make_rng({3});
  Dataset d = generate_synthetic(SynthConfig{}).train;
  const Vocab before = build_vocab(d, 2);
  shuffle_in_place(std::span(d.bags), rng);
  EXPECT_EQ(build_vocab(d, 2), before);
}

TEST(PositionBucket, DistancesFromBothEntities) {
  const int L = 30;
  // "firm" six tokens after entity 1 and three before entity 2.
  EXPECT_EQ(relative_position_bucket(10, 4, L), 6 + L);
  EXPECT_EQ(relative_position_bucket(10, 13, L), -3 + L);
}

TEST(PositionBucket, CentreAndClamp) {
  EXPECT_EQ(relative_position_bucket(5, 5, 30), 30);
  EXPECT_EQ(relative_position_bucket(80, 0, 30), 60);
  EXPECT_EQ(relative_position_bucket(0, 80, 30), 0);
}

TEST(PositionBucket, MonotoneAndSaturating) {
  for (int L : {1, 3, 30}) {
    int prev = -1;
    for (int d = -3 * L - 5; d <= 3 * L + 5; ++d) {
      const int b = relative_position_bucket(d, 0, L);
      EXPECT_GE(b, prev);
      EXPECT_GE(b, 0);
      EXPECT_LT(b, 2 * L + 1);
      if (d <= -L) {
        EXPECT_EQ(b, 0);
      }
      if (d >= L) {
        EXPECT_EQ(b, 2 * L);
      }
      prev = b;
    }
  }
}

}  // namespace
}  // namespace see
