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

// Command-line front end. Exit codes: 0 success, 1 usage, 2 data, 3 numeric.
#pragma once

#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "see/config.hpp"
#include "see/corpus.hpp"
#include "see/embeddings.hpp"
#include "see/errors.hpp"
#include "see/evaluator.hpp"
#include "see/gradcheck.hpp"
#include "see/io.hpp"
#include "see/synth.hpp"
#include "see/trainer.hpp"

namespace see {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumeric = 3 };

namespace cli_detail {

namespace fs = std::filesystem;

template <class T>
T read_json_config(const std::optional<std::string>& path) {
  T cfg{};
  if (!path) return cfg;
  try {
    nlohmann::json j = nlohmann::json::parse(read_file(*path));
    from_json(j, cfg);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(*path + ": " + e.what());
  }
  return cfg;
}

template <class T>
void override_with(T& field, const std::optional<T>& flag) {
  if (flag) field = *flag;
}

struct SgnsFlags {
  std::string corpus;
  std::string out;
  std::size_t dim = 50;
  int epochs = 5;
  int negatives = 5;
  long min_count = 5;
  int window = 5;
  std::uint64_t seed = 1;
};

inline void add_sgns_flags(CLI::App* cmd, SgnsFlags& f, bool linear) {
  cmd->add_option("--corpus", f.corpus, "Corpus JSONL")->required();
  cmd->add_option("--dim", f.dim, "Embedding dimension")->capture_default_str();
  cmd->add_option("--out", f.out, "Output embedding file")->required();
  cmd->add_option("--epochs", f.epochs, "Passes over the context pairs")->capture_default_str();
  cmd->add_option("--negatives", f.negatives, "Negative samples per pair")->capture_default_str();
  cmd->add_option("--min-count", f.min_count, "Minimum symbol frequency")->capture_default_str();
  if (linear) cmd->add_option("--window", f.window, "Linear context window")->capture_default_str();
  cmd->add_option("--seed", f.seed, "Random seed")->capture_default_str();
}

inline void run_sgns(const SgnsFlags& f, bool linear, std::ostream& out) {
  const Dataset data = load_corpus(f.corpus);
  const auto pairs = linear ? corpus_linear_contexts(data, f.window) : corpus_dep_contexts(data);
  SgnsOptions opt;
  opt.dim = f.dim;
  opt.epochs = f.epochs;
  opt.negatives = f.negatives;
  opt.min_count = f.min_count;
  opt.seed = f.seed;
  opt.unk = linear ? "<unk>" : "<unk-dep>";
  const EmbeddingTable table = train_sgns(pairs, opt);
  save_embeddings(table, f.out);
  out << "wrote " << table.vocab.size() << " vectors of dim " << table.dim() << " to " << f.out << "\n";
}

}  // namespace cli_detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  namespace fs = std::filesystem;
  using namespace cli_detail;

  CLI::App app{"Relation extraction with sentence and entity embeddings", "see"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  // gen-synth
  std::optional<std::string> synth_config;
  std::string synth_out;
  std::optional<std::uint64_t> synth_seed;
  std::optional<double> synth_noise;
  auto* gen = app.add_subcommand("gen-synth", "Generate a synthetic train/test corpus");
  gen->add_option("--config", synth_config, "SynthConfig JSON");
  gen->add_option("--out", synth_out, "Output directory")->required();
  gen->add_option("--seed", synth_seed, "Override the config seed");
  gen->add_option("--noise-rate", synth_noise, "Override the config noise rate");

  SgnsFlags dep_flags, word_flags;
  auto* pre_dep = app.add_subcommand("pretrain-dep", "Skip-gram dependency embeddings");
  add_sgns_flags(pre_dep, dep_flags, false);
  auto* pre_word = app.add_subcommand("pretrain-word", "Skip-gram word embeddings");
  add_sgns_flags(pre_word, word_flags, true);

  // train
  std::string tr_corpus, tr_out;
  std::optional<std::string> tr_relations, tr_config, tr_word, tr_dep;
  std::optional<std::string> tr_strategy;
  std::optional<std::uint64_t> tr_seed;
  std::optional<int> tr_epochs, tr_batch, tr_filters, tr_hidden;
  std::optional<double> tr_lr, tr_dropout;
  auto* train_cmd = app.add_subcommand("train", "Train a model");
  train_cmd->add_option("--corpus", tr_corpus, "Training corpus JSONL")->required();
  train_cmd->add_option("--relations", tr_relations, "Relation inventory, one name per line");
  train_cmd->add_option("--config", tr_config, "TrainConfig JSON");
  train_cmd->add_option("--strategy", tr_strategy, "baseline | cat | trans")
      ->check(CLI::IsMember({"baseline", "cat", "trans"}));
  train_cmd->add_option("--seed", tr_seed, "Run seed");
  train_cmd->add_option("--out", tr_out, "Output directory")->required();
  train_cmd->add_option("--word-emb", tr_word, "Pretrained word embeddings");
  train_cmd->add_option("--dep-emb", tr_dep, "Pretrained dependency embeddings");
  train_cmd->add_option("--epochs", tr_epochs, "Override epochs");
  train_cmd->add_option("--batch-size", tr_batch, "Override batch size");
  train_cmd->add_option("--filters", tr_filters, "Override convolution filters");
  train_cmd->add_option("--hidden", tr_hidden, "Override tree-GRU hidden size");
  train_cmd->add_option("--lr", tr_lr, "Override learning rate");
  train_cmd->add_option("--dropout", tr_dropout, "Override dropout rate");

  // predict
  std::string pr_model, pr_corpus, pr_out;
  auto* predict_cmd = app.add_subcommand("predict", "Score every non-NA relation for each bag");
  predict_cmd->add_option("--model", pr_model, "Checkpoint")->required();
  predict_cmd->add_option("--corpus", pr_corpus, "Corpus JSONL")->required();
  predict_cmd->add_option("--out", pr_out, "Predictions CSV")->required();

  // eval-pr / eval-pn
  std::string ev_pred, ev_gold, ev_out;
  auto* eval_pr = app.add_subcommand("eval-pr", "Precision-recall curve over ranked predictions");
  eval_pr->add_option("--pred", ev_pred, "Predictions CSV")->required();
  eval_pr->add_option("--gold", ev_gold, "Gold corpus JSONL (non-NA bags are facts)")->required();
  eval_pr->add_option("--out", ev_out, "PR curve CSV")->required();

  std::string pn_pred, pn_gold;
  std::optional<std::string> pn_out;
  std::vector<std::size_t> pn_n;
  auto* eval_pn = app.add_subcommand("eval-pn", "Precision at the top N predictions");
  eval_pn->add_option("--pred", pn_pred, "Predictions CSV")->required();
  eval_pn->add_option("--gold", pn_gold, "Gold corpus JSONL")->required();
  eval_pn->add_option("--n", pn_n, "Comma-separated N values")->required()->delimiter(',');
  eval_pn->add_option("--out", pn_out, "Write CSV here instead of stdout");

  // att-report
  std::string at_model, at_corpus, at_out;
  auto* att = app.add_subcommand("att-report", "Sentence attention weights against noisy flags");
  att->add_option("--model", at_model, "Checkpoint")->required();
  att->add_option("--corpus", at_corpus, "Corpus JSONL with noisy flags")->required();
  att->add_option("--out", at_out, "Report CSV")->required();

  // gradcheck
  std::optional<std::string> gc_module;
  std::uint64_t gc_seeds = 20;
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  gc->add_option("--module", gc_module, "pcnn | entity | attention | heads | bag_loss")
      ->check(CLI::IsMember(gradcheck_modules()));
  gc->add_option("--seeds", gc_seeds, "Number of seeds")->capture_default_str();

  try {
    std::vector<std::string> args;
    for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) {
      SynthConfig cfg = read_json_config<SynthConfig>(synth_config);
      override_with(cfg.seed, synth_seed);
      override_with(cfg.noise_rate, synth_noise);
      validate(cfg);
      const SyntheticCorpus corpus = generate_synthetic(cfg);
      const fs::path dir = synth_out;
      save_corpus(corpus.train, dir / "train.jsonl");
      save_corpus(corpus.test, dir / "test.jsonl");
      write_file_atomic(dir / "relations.txt", format_relations(corpus.train.relation_names));
      out << "wrote " << corpus.train.bags.size() << " train and " << corpus.test.bags.size()
          << " test bags to " << synth_out << "\n";
    } else if (*pre_dep) {
      run_sgns(dep_flags, false, out);
    } else if (*pre_word) {
      run_sgns(word_flags, true, out);
    } else if (*train_cmd) {
      TrainConfig cfg = read_json_config<TrainConfig>(tr_config);
      if (tr_strategy) cfg.strategy = parse_strategy(*tr_strategy);
      override_with(cfg.seed, tr_seed);
      override_with(cfg.epochs, tr_epochs);
      override_with(cfg.batch_size, tr_batch);
      override_with(cfg.filters, tr_filters);
      override_with(cfg.hidden, tr_hidden);
      override_with(cfg.learning_rate, tr_lr);
      override_with(cfg.dropout_rate, tr_dropout);
      validate(cfg);
      // Every input is read before the output directory exists.
      std::optional<std::vector<std::string>> relations;
      if (tr_relations) relations = load_relations(*tr_relations);
      const Dataset data = load_corpus(tr_corpus, relations ? &*relations : nullptr);
      std::optional<EmbeddingTable> word_emb, dep_emb;
      if (tr_word) word_emb = load_embeddings(*tr_word);
      if (tr_dep) dep_emb = load_embeddings(*tr_dep);
      TrainOptions opt;
      opt.word_embeddings = word_emb ? &*word_emb : nullptr;
      opt.dep_embeddings = dep_emb ? &*dep_emb : nullptr;
      initial_model(data, cfg, opt);  // rejects dimension mismatches up front
      const fs::path dir = tr_out;
      opt.checkpoint_dir = dir;
      opt.on_epoch = [&](const EpochLog& e) {
        out << "epoch " << e.epoch << " mean_loss " << format_double(e.mean_loss) << "\n";
      };
      const TrainResult result = train(data, cfg, opt);
      save_checkpoint(result.model, dir / "model.ckpt");
      write_file_atomic(dir / "train_log.csv", format_train_log(result.log));
      out << "best epoch " << result.best_epoch << "; model written to " << (dir / "model.ckpt").string()
          << "\n";
    } else if (*predict_cmd) {
      const Model m = load_checkpoint(pr_model);
      const Dataset data = load_corpus(pr_corpus, &m.relations);
      write_file_atomic(pr_out, format_predictions(predict_bags(data, m)));
    } else if (*eval_pr) {
      const auto preds = parse_predictions(read_file(ev_pred));
      const GoldSet gold = gold_for_predictions(load_corpus(ev_gold), preds);
      write_file_atomic(ev_out, format_pr_curve(pr_curve(preds, gold)));
    } else if (*eval_pn) {
      const auto preds = parse_predictions(read_file(pn_pred));
      const GoldSet gold = gold_for_predictions(load_corpus(pn_gold), preds);
      std::vector<std::pair<std::size_t, double>> rows;
      for (std::size_t n : pn_n) rows.emplace_back(n, p_at_n(preds, gold, n));
      const std::string csv = format_p_at_n(rows);
      if (pn_out) {
        write_file_atomic(*pn_out, csv);
      } else {
        out << csv;
      }
    } else if (*att) {
      const Model m = load_checkpoint(at_model);
      const Dataset data = load_corpus(at_corpus, &m.relations);
      const AttentionReport rep = attention_report(data, m);
      write_file_atomic(at_out, format_attention_report(rep));
      out << "mixed bags " << rep.mixed_bags << ": clean mean " << format_double(rep.clean_mean)
          << ", noisy mean " << format_double(rep.noisy_mean) << "\n";
    } else if (*gc) {
      const std::vector<std::string> modules =
          gc_module ? std::vector<std::string>{*gc_module} : gradcheck_modules();
      bool ok = true;
      for (const auto& r : run_gradcheck(modules, gc_seeds)) {
        const bool pass = r.max_rel_error < 1e-4;
        ok = ok && pass;
        out << r.composite << " max_rel_error " << format_double(r.max_rel_error) << " at " << r.worst
            << (pass ? "" : "  FAIL") << "\n";
      }
      return ok ? kExitOk : kExitNumeric;
    }
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "file error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace see
