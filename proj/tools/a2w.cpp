// tools/a2w.cpp

// Copyright 2026  The a2w Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// a2w: synthetic data generation, training, decoding, scoring and embedding
// analysis for acoustics-to-word CTC models.
//
// Every subcommand accepts --config FILE with flat "key = value" lines whose
// keys are the long flag names without dashes. Values given on the command
// line override the file.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "a2w/error.hpp"
#include "commands.hpp"

namespace {

using a2w::ErrorKind;

enum ExitCode {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,
  kExitInvalidArgument = 3,
  kExitDimensionMismatch = 4,
  kExitInfeasibleTarget = 5,
  kExitMalformed = 6,
  kExitTruncated = 7,
  kExitUnknownLabel = 8,
  kExitIo = 9,
  kExitStaleTape = 10,
};

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return kExitInvalidArgument;
    case ErrorKind::kDimensionMismatch: return kExitDimensionMismatch;
    case ErrorKind::kInfeasibleTarget: return kExitInfeasibleTarget;
    case ErrorKind::kMalformedHeader: return kExitMalformed;
    case ErrorKind::kTruncated: return kExitTruncated;
    case ErrorKind::kUnknownLabel: return kExitUnknownLabel;
    case ErrorKind::kIo: return kExitIo;
    case ErrorKind::kStaleTape: return kExitStaleTape;
  }
  return kExitInternal;
}

const char *KindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid argument";
    case ErrorKind::kDimensionMismatch: return "dimension mismatch";
    case ErrorKind::kInfeasibleTarget: return "infeasible target";
    case ErrorKind::kMalformedHeader: return "malformed input";
    case ErrorKind::kTruncated: return "truncated input";
    case ErrorKind::kUnknownLabel: return "unknown label";
    case ErrorKind::kIo: return "i/o error";
    case ErrorKind::kStaleTape: return "stale tape";
  }
  return "error";
}

// Turns the --config file of the invoked subcommand into "--key=value"
// arguments placed ahead of the command-line ones, so that the latter win.
std::vector<std::string> ExpandConfig(const std::vector<std::string> &args,
                                      const std::vector<std::string> &subcommands) {
  if (args.empty() || std::find(subcommands.begin(), subcommands.end(), args[0]) == subcommands.end())
    return args;
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;

  std::ifstream is(path);
  if (!is) a2w::Fail(ErrorKind::kIo, "cannot open config file '" + path + "'");
  std::vector<std::string> out{args[0]};
  for (const auto &item : CLI::ConfigINI().from_config(is)) {
    if (item.name.empty() || item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty() && item.parents.front() != args[0]) continue;
    std::string value;
    for (const auto &v : item.inputs) value += (value.empty() ? "" : " ") + v;
    out.push_back("--" + item.name + "=" + value);
  }
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

}  // namespace

int main(int argc, char **argv) {
  namespace cli = a2w::cli;
  CLI::App app{"Acoustics-to-word CTC toolkit"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_path;

  cli::SynthOptions so;
  auto *synth = app.add_subcommand("synth", "Generate a synthetic corpus, lexicon and alignments");
  synth->add_option("--config", config_path, "Flat key=value file");
  synth->add_option("--seed", so.config.seed)->capture_default_str();
  synth->add_option("--vocab-size", so.config.vocab_size)->capture_default_str();
  synth->add_option("--phonemes", so.config.phoneme_count)->capture_default_str();
  synth->add_option("--feature-dim", so.config.feature_dim)->capture_default_str();
  synth->add_option("--duration-mean", so.config.phone_duration_mean, "Phoneme duration mean (frames)")
      ->capture_default_str();
  synth->add_option("--duration-std", so.config.phone_duration_std)->capture_default_str();
  synth->add_option("--pron-min", so.config.pron_min)->capture_default_str();
  synth->add_option("--pron-max", so.config.pron_max)->capture_default_str();
  synth->add_option("--noise", so.config.noise)->capture_default_str();
  synth->add_option("--words-min", so.config.words_min)->capture_default_str();
  synth->add_option("--words-max", so.config.words_max)->capture_default_str();
  synth->add_option("--train-size", so.config.train_size)->capture_default_str();
  synth->add_option("--dev-size", so.config.dev_size)->capture_default_str();
  synth->add_option("--test-size", so.config.test_size)->capture_default_str();
  synth->add_option("--silence-prob", so.config.silence_prob)->capture_default_str();
  synth->add_option("--zipf", so.config.zipf)->capture_default_str();
  synth->add_option("--out-dir", so.out_dir)->required();

  cli::TrainOptions to;
  auto *train = app.add_subcommand("train", "Train a word CTC, phoneme CTC or frame classifier model");
  train->add_option("--config", config_path, "Flat key=value file");
  train->add_option("--mode", to.mode, "word-ctc, phoneme-ctc or frame-classifier")->capture_default_str();
  train->add_option("--train", to.train_dir, "Training corpus directory")->required();
  train->add_option("--dev", to.dev_dir, "Dev corpus directory (default: split --train)");
  train->add_option("--train-fraction", to.train_fraction, "Train share when splitting --train")
      ->capture_default_str();
  train->add_option("--vocab", to.vocab_path, "Label list (default: from the data)");
  train->add_option("--lexicon", to.lexicon_path);
  train->add_option("--downsample", to.downsample, "Total frame-rate reduction: 1, 2, 4, 8, 16")
      ->capture_default_str();
  train->add_option("--downsample-at", to.downsample_at, "layers or input")->capture_default_str();
  train->add_option("--layers", to.layers)->capture_default_str();
  train->add_option("--hidden", to.hidden)->capture_default_str();
  train->add_option("--init-from", to.init_from, "Model whose bottom layers initialize this one");
  train->add_option("--init-layers", to.init_layers)->capture_default_str();
  train->add_option("--data-fraction", to.data_fraction)->capture_default_str();
  train->add_option("--seed", to.seed)->capture_default_str();
  train->add_option("--phase1-epochs", to.phase1_epochs)->capture_default_str();
  train->add_option("--phase1-lr", to.phase1_lr)->capture_default_str();
  train->add_option("--phase2-epochs", to.phase2_epochs)->capture_default_str();
  train->add_option("--phase2-lr", to.phase2_lr)->capture_default_str();
  train->add_option("--decay", to.decay)->capture_default_str();
  train->add_option("--clip", to.clip)->capture_default_str();
  train->add_flag("--quiet", to.quiet, "No per-epoch progress");
  train->add_option("--out-dir", to.out_dir)->required();

  cli::DecodeOptions dec;
  auto *decode = app.add_subcommand("decode", "Greedy decoding of a corpus");
  decode->add_option("--config", config_path, "Flat key=value file");
  decode->add_option("--model", dec.model)->required();
  decode->add_option("--data", dec.data_dir)->required();
  decode->add_option("--lexicon", dec.lexicon_path, "Needed for phoneme references");
  decode->add_option("--out-dir", dec.out_dir)->required();

  cli::ScoreOptions sc;
  auto *score = app.add_subcommand("score", "WER, PER or FER of hypotheses against references");
  score->add_option("--config", config_path, "Flat key=value file");
  score->add_option("--ref", sc.ref)->required();
  score->add_option("--hyp", sc.hyp)->required();
  score->add_option("--metric", sc.metric, "wer, per or fer")->capture_default_str();
  score->add_option("--out-dir", sc.out_dir)->required();

  cli::AnalyzeOptions an;
  auto *analyze = app.add_subcommand("analyze", "Softmax-weight embedding analysis");
  analyze->add_option("--config", config_path, "Flat key=value file");
  analyze->add_option("--model", an.model)->required();
  analyze->add_option("--lexicon", an.lexicon_path);
  analyze->add_option("--train", an.train_dir, "Corpus for word counts");
  analyze->add_flag("--overlap", an.overlap, "Pronunciation overlap of close and far neighbors");
  analyze->add_flag("--blank", an.blank, "Blank distance against word-word distances");
  analyze->add_flag("--margin", an.margin, "Word frequency against margin");
  analyze->add_option("--permutations", an.permutations)->capture_default_str();
  analyze->add_option("--neighbors", an.neighbors, "k for the blank report")->capture_default_str();
  analyze->add_option("--bins", an.bins)->capture_default_str();
  analyze->add_option("--seed", an.seed)->capture_default_str();
  analyze->add_option("--out-dir", an.out_dir)->required();

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = ExpandConfig(args, {"synth", "train", "decode", "score", "analyze"});
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const a2w::Error &e) {
    std::cerr << "a2w: " << KindName(e.kind()) << ": " << e.what() << '\n';
    return ExitCodeFor(e.kind());
  }

  try {
    if (synth->parsed()) cli::RunSynth(so);
    if (train->parsed()) cli::RunTrain(to);
    if (decode->parsed()) cli::RunDecode(dec);
    if (score->parsed()) cli::RunScore(sc);
    if (analyze->parsed()) cli::RunAnalyze(an);
  } catch (const a2w::Error &e) {
    std::cerr << "a2w: " << KindName(e.kind()) << ": " << e.what() << '\n';
    return ExitCodeFor(e.kind());
  } catch (const std::exception &e) {
    std::cerr << "a2w: internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitOk;
}
