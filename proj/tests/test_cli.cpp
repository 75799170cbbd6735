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

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "see/cli.hpp"

namespace see {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "see");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("see_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string s(const fs::path& p) { return p.string(); }

void write(const fs::path& p, const std::string& text) { write_file_atomic(p, text); }

const char* kSynth = R"({"n_entity_pairs": 40, "n_test_pairs": 12, "noise_rate": 0.3})";
const char* kTrain =
    R"({"d_word": 8, "d_dep": 6, "d_pos": 3, "filters": 10, "hidden": 8, "batch_size": 20, "epochs": 2, "dep_min_count": 1})";

TEST(Cli, HelpOnEverySubcommand) {
  const std::map<std::string, std::vector<std::string>> flags{
      {"gen-synth", {"--config", "--out", "--seed", "--noise-rate"}},
      {"pretrain-dep", {"--corpus", "--dim", "--out", "--epochs", "--negatives", "--min-count", "--seed"}},
      {"pretrain-word", {"--corpus", "--dim", "--out", "--window", "--min-count"}},
      {"train", {"--corpus", "--relations", "--config", "--strategy", "--seed", "--out", "--word-emb", "--dep-emb"}},
      {"predict", {"--model", "--corpus", "--out"}},
      {"eval-pr", {"--pred", "--gold", "--out"}},
      {"eval-pn", {"--pred", "--gold", "--n"}},
      {"att-report", {"--model", "--corpus", "--out"}},
      {"gradcheck", {"--module", "--seeds"}}};
  for (const auto& [cmd, names] : flags) {
    const CliRun r = run({cmd, "--help"});
    EXPECT_EQ(r.code, 0) << cmd;
    for (const auto& f : names) EXPECT_NE(r.out.find(f), std::string::npos) << cmd << " " << f;
  }
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"predict", "--model", "m", "--corpus", "c", "--out", "o", "--bogus"}).code, 1);
  EXPECT_EQ(run({"predict", "--model", "m"}).code, 1);
  EXPECT_EQ(run({"train", "--corpus", "c", "--out", "o", "--strategy", "lstm"}).code, 1);
}

TEST(Cli, MissingCorpusCreatesNothing) {
  const fs::path dir = scratch("missing");
  const CliRun r = run({"train", "--corpus", s(dir / "absent.jsonl"), "--out", s(dir / "run")});
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(r.err.empty());
  EXPECT_FALSE(fs::exists(dir / "run"));
}

TEST(Cli, BadEmbeddingDimensionCreatesNothing) {
  const fs::path dir = scratch("dims");
  write(dir / "synth.json", kSynth);
  write(dir / "train.json", kTrain);
  ASSERT_EQ(run({"gen-synth", "--config", s(dir / "synth.json"), "--out", s(dir / "data")}).code, 0);
  ASSERT_EQ(run({"pretrain-word", "--corpus", s(dir / "data/train.jsonl"), "--dim", "5", "--out", s(dir / "w.txt"),
                 "--epochs", "1", "--min-count", "1"})
                .code,
            0);
  const CliRun r = run({"train", "--corpus", s(dir / "data/train.jsonl"), "--config", s(dir / "train.json"),
                     "--word-emb", s(dir / "w.txt"), "--out", s(dir / "run")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("file has 5, model expects 8"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir / "run"));
}

TEST(Cli, GenSynthIsDeterministic) {
  const fs::path dir = scratch("gen");
  write(dir / "synth.json", kSynth);
  for (const char* sub : {"a", "b"}) {
    ASSERT_EQ(run({"gen-synth", "--config", s(dir / "synth.json"), "--out", s(dir / sub), "--seed", "7"}).code, 0);
  }
  for (const char* f : {"train.jsonl", "test.jsonl", "relations.txt"}) {
    EXPECT_EQ(read_file(dir / "a" / f), read_file(dir / "b" / f)) << f;
  }
  ASSERT_EQ(run({"gen-synth", "--config", s(dir / "synth.json"), "--out", s(dir / "c"), "--seed", "8"}).code, 0);
  EXPECT_NE(read_file(dir / "a/train.jsonl"), read_file(dir / "c/train.jsonl"));
}

TEST(Cli, InfeasibleSynthConfigIsDataError) {
  const fs::path dir = scratch("infeasible");
  write(dir / "synth.json", R"({"n_relations": 1})");
  EXPECT_EQ(run({"gen-synth", "--config", s(dir / "synth.json"), "--out", s(dir / "data")}).code, 2);
  write(dir / "synth.json", R"({"n_relatons": 3})");
  EXPECT_EQ(run({"gen-synth", "--config", s(dir / "synth.json"), "--out", s(dir / "data")}).code, 2);
}

TEST(Cli, EndToEndPipeline) {
  const fs::path dir = scratch("pipeline");
  write(dir / "synth.json", kSynth);
  write(dir / "train.json", kTrain);
  const std::string train = s(dir / "data/train.jsonl"), test = s(dir / "data/test.jsonl");
  ASSERT_EQ(run({"gen-synth", "--config", s(dir / "synth.json"), "--out", s(dir / "data")}).code, 0);
  ASSERT_EQ(run({"pretrain-word", "--corpus", train, "--dim", "8", "--out", s(dir / "w.txt"), "--epochs", "2",
                 "--min-count", "1"})
                .code,
            0);
  ASSERT_EQ(run({"pretrain-dep", "--corpus", train, "--dim", "6", "--out", s(dir / "d.txt"), "--epochs", "2",
                 "--min-count", "1"})
                .code,
            0);
  const CliRun tr = run({"train", "--corpus", train, "--relations", s(dir / "data/relations.txt"), "--config",
                      s(dir / "train.json"), "--strategy", "trans", "--word-emb", s(dir / "w.txt"), "--dep-emb",
                      s(dir / "d.txt"), "--out", s(dir / "run")});
  ASSERT_EQ(tr.code, 0) << tr.err;
  for (const char* f : {"epoch_1.ckpt", "epoch_2.ckpt", "model.ckpt", "train_log.csv"}) {
    EXPECT_TRUE(fs::exists(dir / "run" / f)) << f;
  }
  EXPECT_EQ(load_checkpoint(dir / "run/model.ckpt").config.strategy, Strategy::kTrans);

  ASSERT_EQ(run({"predict", "--model", s(dir / "run/model.ckpt"), "--corpus", test, "--out", s(dir / "pred.csv")})
                .code,
            0);
  const auto preds = parse_predictions(read_file(dir / "pred.csv"));
  EXPECT_EQ(preds.size(), 12u * 4u);

  ASSERT_EQ(run({"eval-pr", "--pred", s(dir / "pred.csv"), "--gold", test, "--out", s(dir / "pr.csv")}).code, 0);
  const std::string pr = read_file(dir / "pr.csv");
  EXPECT_EQ(pr.substr(0, pr.find('\n')), "rank,probability,precision,recall");
  EXPECT_EQ(std::count(pr.begin(), pr.end(), '\n'), 1 + 48);

  const CliRun pn = run({"eval-pn", "--pred", s(dir / "pred.csv"), "--gold", test, "--n", "1,5,10"});
  ASSERT_EQ(pn.code, 0) << pn.err;
  EXPECT_EQ(pn.out.substr(0, 12), "N,precision\n");
  EXPECT_EQ(std::count(pn.out.begin(), pn.out.end(), '\n'), 4);
  EXPECT_EQ(run({"eval-pn", "--pred", s(dir / "pred.csv"), "--gold", test, "--n", "1000"}).code, 2);

  ASSERT_EQ(run({"att-report", "--model", s(dir / "run/model.ckpt"), "--corpus", train, "--out", s(dir / "att.csv")})
                .code,
            0);
  EXPECT_NE(read_file(dir / "att.csv").find("summary,noisy,"), std::string::npos);

  // A baseline checkpoint loads under predict as well.
  ASSERT_EQ(run({"train", "--corpus", train, "--config", s(dir / "train.json"), "--strategy", "baseline", "--out",
                 s(dir / "base"), "--epochs", "1"})
                .code,
            0);
  EXPECT_EQ(run({"predict", "--model", s(dir / "base/model.ckpt"), "--corpus", test, "--out", s(dir / "p2.csv")})
                .code,
            0);
}

TEST(Cli, MalformedInputIsDataError) {
  const fs::path dir = scratch("malformed");
  write(dir / "bad.jsonl", "{\"e1\": \"a\"\n");
  EXPECT_EQ(run({"train", "--corpus", s(dir / "bad.jsonl"), "--out", s(dir / "run")}).code, 2);
  write(dir / "ckpt", "garbage");
  EXPECT_EQ(run({"predict", "--model", s(dir / "ckpt"), "--corpus", s(dir / "bad.jsonl"), "--out", s(dir / "p")})
                .code,
            2);
  write(dir / "pred.csv", "e1,e2,relation_id,relation,probability\na,b,x,r,0.5\n");
  write(dir / "gold.jsonl", "");
  EXPECT_EQ(run({"eval-pr", "--pred", s(dir / "pred.csv"), "--gold", s(dir / "gold.jsonl"), "--out", s(dir / "o")})
                .code,
            2);
  EXPECT_FALSE(fs::exists(dir / "o"));
}

TEST(Cli, NonFiniteInputIsNumericFailure) {
  const fs::path dir = scratch("nan");
  write(dir / "synth.json", kSynth);
  ASSERT_EQ(run({"gen-synth", "--config", s(dir / "synth.json"), "--out", s(dir / "data")}).code, 0);
  write(dir / "pred.csv", "e1,e2,relation_id,relation,probability\na,b,1,r1,nan\n");
  const CliRun r =
      run({"eval-pr", "--pred", s(dir / "pred.csv"), "--gold", s(dir / "data/test.jsonl"), "--out", s(dir / "o")});
  EXPECT_EQ(r.code, 3) << r.err;
  EXPECT_FALSE(fs::exists(dir / "o"));

  std::string emb = "2 8\n<unk> 0 0 0 0 0 0 0 0\n";
  const Dataset d = load_corpus(dir / "data/train.jsonl");
  emb[0] = '2';
  emb += d.bags[0].sentences[0].tokens[0] + " nan 0 0 0 0 0 0 0\n";
  write(dir / "w.txt", emb);
  write(dir / "train.json", kTrain);
  const CliRun t = run({"train", "--corpus", s(dir / "data/train.jsonl"), "--config", s(dir / "train.json"),
                     "--word-emb", s(dir / "w.txt"), "--out", s(dir / "run")});
  EXPECT_EQ(t.code, 3) << t.err;
  EXPECT_NE(t.err.find("epoch 1"), std::string::npos) << t.err;
}

TEST(Cli, GradcheckHeadsPasses) {
  const CliRun r = run({"gradcheck", "--module", "heads", "--seeds", "3"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("head_trans max_rel_error"), std::string::npos) << r.out;
  EXPECT_EQ(run({"gradcheck", "--module", "lstm"}).code, 1);
}

TEST(Cli, InstalledBinaryReportsExitCodes) {
  const char* bin = std::getenv("SEE_CLI");
  if (bin == nullptr) GTEST_SKIP() << "SEE_CLI not set";
  EXPECT_EQ(std::system((std::string(bin) + " --help > /dev/null").c_str()), 0);
  const int status = std::system((std::string(bin) + " frobnicate > /dev/null 2>&1").c_str());
  EXPECT_EQ(WEXITSTATUS(status), 1);
}

}  // namespace
}  // namespace see
