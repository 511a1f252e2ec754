// tools/commands.cpp

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

#include "commands.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "a2w/analysis.hpp"
#include "a2w/error.hpp"
#include "a2w/metrics.hpp"
#include "a2w/network.hpp"
#include "a2w/rng.hpp"
#include "a2w/training.hpp"

namespace fs = std::filesystem;

namespace a2w::cli {

namespace {

// Sub-seeds drawn from the single --seed of an invocation.
enum SeedTag : std::uint64_t {
  kInitSeed = 1,
  kShuffleSeed = 2,
  kSplitSeed = 3,
  kSubsetSeed = 4,
  kPermutationSeed = 5,
};

std::ofstream OpenOut(const std::string &path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) Fail(ErrorKind::kIo, "cannot open '" + path + "' for writing");
  return os;
}

void Close(std::ofstream &os, const std::string &path) {
  os.close();
  if (!os) Fail(ErrorKind::kIo, "failed writing '" + path + "'");
}

void Warn(const std::string &msg) { std::cerr << "a2w: warning: " << msg << '\n'; }

std::vector<std::string> SortedTranscriptWords(const Corpus &corpus) {
  std::set<std::string> words;
  for (const auto &u : corpus) words.insert(u.words.begin(), u.words.end());
  return {words.begin(), words.end()};
}

// True when the network can produce output for a T-frame input.
bool Decodable(const Network &net, Eigen::Index frames) {
  Example ex;
  ex.features = Mat::Zero(frames, net.config().input_dim);
  if (!IsCtc(net.mode())) ex.targets.assign(static_cast<std::size_t>(frames), 0);
  return IsFeasible(net, ex);
}

std::vector<std::string> ReferenceLabels(ModelMode mode, const Utterance &u, const Lexicon *lexicon) {
  switch (mode) {
    case ModelMode::kWordCtc:
      return u.words;
    case ModelMode::kPhonemeCtc:
      Require(lexicon != nullptr, "decode: phoneme models need --lexicon for references");
      return ConvertToPhonemes(u.words, *lexicon);
    case ModelMode::kFrameClassifier:
      Require(!u.alignment.empty(), "decode: utterance '" + u.id + "' has no alignment");
      return u.alignment;
  }
  return {};
}

void WriteStatistic(std::ostream &os, const std::string &key, double value) {
  os << fmt::format("{}\t{}\n", key, value);
}

}  // namespace

OutputSet::OutputSet(const std::string &dir) : root_(dir) {
  Require(!dir.empty(), "--out-dir is required");
  std::error_code ec;
  if (!fs::exists(root_)) {
    fs::create_directories(root_, ec);
    if (ec) Fail(ErrorKind::kIo, "cannot create '" + dir + "': " + ec.message());
    created_root_ = true;
  } else if (!fs::is_directory(root_)) {
    Fail(ErrorKind::kIo, "'" + dir + "' exists and is not a directory");
  }
}

OutputSet::~OutputSet() {
  if (committed_) return;
  std::error_code ec;
  for (auto it = paths_.rbegin(); it != paths_.rend(); ++it) fs::remove_all(*it, ec);
  if (created_root_ && fs::is_empty(root_, ec)) fs::remove(root_, ec);
}

std::string OutputSet::File(const std::string &name) {
  paths_.push_back(root_ / name);
  return paths_.back().string();
}

std::string OutputSet::Dir(const std::string &name) {
  paths_.push_back(root_ / name);
  std::error_code ec;
  fs::create_directories(paths_.back(), ec);
  if (ec) Fail(ErrorKind::kIo, "cannot create '" + paths_.back().string() + "': " + ec.message());
  return paths_.back().string();
}

void RunSynth(const SynthOptions &opt) {
  opt.config.Validate();
  OutputSet out(opt.out_dir);
  const SyntheticCorpus sc = GenerateSynthetic(opt.config);
  SaveCorpus(out.Dir("train"), sc.train);
  SaveCorpus(out.Dir("dev"), sc.dev);
  SaveCorpus(out.Dir("test"), sc.test);
  SaveLexicon(out.File("lexicon.tsv"), sc.lexicon);
  SaveLabelList(out.File("words.txt"), sc.words);
  SaveLabelList(out.File("phones.txt"), sc.phones);
  out.Commit();
  std::cout << fmt::format("synth: {} train / {} dev / {} test utterances, {} words, {} phonemes\n",
                           sc.train.size(), sc.dev.size(), sc.test.size(), sc.words.size(),
                           sc.phones.size());
}

void RunTrain(const TrainOptions &opt) {
  const ModelMode mode = ParseModelMode(opt.mode);
  Require(opt.data_fraction > 0.0 && opt.data_fraction <= 1.0, "--data-fraction must be in (0, 1]");
  Require(opt.layers >= 1 && opt.hidden >= 1, "--layers and --hidden must be positive");
  Require(opt.downsample_at == "layers" || opt.downsample_at == "input",
          "--downsample-at must be 'layers' or 'input'");
  Require(!opt.train_dir.empty(), "--train is required");

  std::unique_ptr<Lexicon> lexicon;
  if (!opt.lexicon_path.empty()) lexicon = std::make_unique<Lexicon>(LoadLexicon(opt.lexicon_path));
  Require(mode != ModelMode::kPhonemeCtc || lexicon, "phoneme-ctc training needs --lexicon");

  Corpus train = LoadCorpus(opt.train_dir);
  Corpus dev;
  if (opt.dev_dir.empty()) {
    std::tie(train, dev) = TrainDevSplit(train, opt.train_fraction, DeriveSeed(opt.seed, kSplitSeed));
  } else {
    dev = LoadCorpus(opt.dev_dir);
  }
  if (opt.data_fraction < 1.0) train = SubsetFraction(train, opt.data_fraction, DeriveSeed(opt.seed, kSubsetSeed));

  std::vector<std::string> labels;
  if (!opt.vocab_path.empty())
    labels = LoadLabelList(opt.vocab_path);
  else if (mode == ModelMode::kPhonemeCtc)
    labels = lexicon->phones();
  else
    labels = SortedTranscriptWords(train);
  const Vocabulary vocab(labels);

  NetworkConfig nc;
  nc.mode = mode;
  nc.input_dim = static_cast<int>(train.front().features.cols());
  nc.hidden_dim = opt.hidden;
  nc.num_layers = opt.layers;
  const int m = FactorToExponent(opt.downsample);
  if (opt.downsample_at == "input") {
    nc.reductions.assign(static_cast<std::size_t>(opt.layers) + 1, 0);
    nc.reductions[0] = m;
  } else {
    nc.reductions = DownsamplePlan(m, opt.layers);
  }
  Network model = Network::Random(nc, vocab, DeriveSeed(opt.seed, kInitSeed));
  if (!opt.init_from.empty()) {
    const Network src = LoadModel(opt.init_from);
    TransferBottomLayers(src, model, static_cast<std::size_t>(opt.init_layers));
  }

  const Dataset train_set = MakeDataset(train, mode, vocab, lexicon.get());
  const Dataset dev_set = MakeDataset(dev, mode, vocab, lexicon.get());

  TrainConfig tc;
  tc.phase1_epochs = opt.phase1_epochs;
  tc.phase1_lr = opt.phase1_lr;
  tc.phase2_epochs = opt.phase2_epochs;
  tc.phase2_lr = opt.phase2_lr;
  tc.decay = opt.decay;
  tc.clip_norm = opt.clip;
  tc.seed = DeriveSeed(opt.seed, kShuffleSeed);

  OutputSet out(opt.out_dir);
  const std::string model_path = out.File("model.a2w");
  const std::string log_path = out.File("train_log.tsv");
  const std::string summary_path = out.File("train_summary.tsv");

  TrainHooks hooks;
  hooks.warn = Warn;
  hooks.on_epoch = [&](const EpochRecord &r) {
    if (!opt.quiet)
      std::cout << fmt::format("epoch {} phase {} lr {} loss {:.4f} perplexity {:.4f} dev {:.2f} skipped {}\n",
                               r.epoch, r.phase, r.lr, r.train_loss, r.train_perplexity,
                               r.dev_metric, r.skipped)
                << std::flush;
  };
  const TrainResult result = Train(std::move(model), train_set, dev_set, tc, hooks);

  SaveModel(result.best, model_path);
  auto log = OpenOut(log_path);
  result.log.Write(log);
  Close(log, log_path);
  auto summary = OpenOut(summary_path);
  summary << "statistic\tvalue\n";
  summary << fmt::format("mode\t{}\n", ToString(mode));
  summary << fmt::format("train_utterances\t{}\n", train_set.examples.size());
  summary << fmt::format("dev_utterances\t{}\n", dev_set.examples.size());
  summary << fmt::format("parameters\t{}\n", result.best.ParameterCount());
  summary << fmt::format("best_epoch\t{}\n", result.best_epoch);
  WriteStatistic(summary, "best_dev_metric", result.best_dev_metric);
  Close(summary, summary_path);
  out.Commit();
  std::cout << fmt::format("train: best epoch {} dev {:.2f}%\n", result.best_epoch, result.best_dev_metric);
}

void RunDecode(const DecodeOptions &opt) {
  Require(!opt.model.empty() && !opt.data_dir.empty(), "decode needs --model and --data");
  const Network net = LoadModel(opt.model);
  std::unique_ptr<Lexicon> lexicon;
  if (!opt.lexicon_path.empty()) lexicon = std::make_unique<Lexicon>(LoadLexicon(opt.lexicon_path));
  const Corpus corpus = LoadCorpus(opt.data_dir);

  using Table = std::vector<std::pair<std::string, std::vector<std::string>>>;
  Table refs, hyps;
  for (const auto &u : corpus) {
    refs.emplace_back(u.id, ReferenceLabels(net.mode(), u, lexicon.get()));
    std::vector<std::string> hyp;
    if (!Decodable(net, u.features.rows())) {
      Warn("'" + u.id + "' is too short for the model's down-sampling; empty hypothesis");
    } else {
      for (Label id : Predict(net, u.features))
        hyp.push_back(id == net.vocab().blank() ? kSilence : net.vocab().label(id));
    }
    hyps.emplace_back(u.id, std::move(hyp));
  }

  OutputSet out(opt.out_dir);
  const std::string hyp_path = out.File("hyp.txt");
  const std::string ref_path = out.File("ref.txt");
  auto hos = OpenOut(hyp_path);
  WriteLabelTable(hos, hyps);
  Close(hos, hyp_path);
  auto ros = OpenOut(ref_path);
  WriteLabelTable(ros, refs);
  Close(ros, ref_path);
  out.Commit();
  std::cout << fmt::format("decode: {} utterances\n", corpus.size());
}

void RunScore(const ScoreOptions &opt) {
  Require(opt.metric == "wer" || opt.metric == "per" || opt.metric == "fer",
          "--metric must be wer, per or fer");
  const auto refs = ReadLabelTable(opt.ref);
  const auto hyp_rows = ReadLabelTable(opt.hyp);
  std::map<std::string, const std::vector<std::string> *> hyps;
  for (const auto &[id, labels] : hyp_rows)
    Require(hyps.emplace(id, &labels).second, "duplicate hypothesis id '" + id + "'");

  ScoreReport report;
  for (const auto &[id, ref] : refs) {
    auto it = hyps.find(id);
    if (it == hyps.end()) Fail(ErrorKind::kUnknownLabel, "no hypothesis for utterance '" + id + "'");
    const auto &hyp = *it->second;
    if (opt.metric == "fer") {
      if (ref.size() != hyp.size())
        Fail(ErrorKind::kDimensionMismatch, "utterance '" + id + "': " + std::to_string(ref.size()) +
                                                " reference frames vs " + std::to_string(hyp.size()));
      EditStats s;
      s.ref_length = ref.size();
      for (std::size_t t = 0; t < ref.size(); ++t) s.substitutions += ref[t] != hyp[t];
      report.Add(id, s);
    } else {
      report.Add(id, EditDistance(ref, hyp));
    }
    hyps.erase(it);
  }
  if (!hyps.empty())
    Fail(ErrorKind::kUnknownLabel, "hypothesis for unknown utterance '" + hyps.begin()->first + "'");

  const double rate = report.PooledRate();
  OutputSet out(opt.out_dir);
  const std::string path = out.File("score.tsv");
  auto os = OpenOut(path);
  report.Write(os);
  Close(os, path);
  out.Commit();
  std::string name = opt.metric;
  std::transform(name.begin(), name.end(), name.begin(), ::toupper);
  std::cout << fmt::format("{} {:.2f}% ({} errors / {} reference labels)\n", name, rate,
                           report.pooled.errors(), report.pooled.ref_length);
}

void RunAnalyze(const AnalyzeOptions &opt) {
  Require(!opt.model.empty(), "analyze needs --model");
  Require(opt.overlap || opt.blank || opt.margin, "analyze needs --overlap, --blank or --margin");
  Require(!opt.overlap || !opt.lexicon_path.empty(), "--overlap needs --lexicon");
  Require(!opt.margin || !opt.train_dir.empty(), "--margin needs --train");

  const Network net = LoadModel(opt.model);
  const EmbeddingMatrix e = EmbeddingMatrix::FromNetwork(net);
  OutputSet out(opt.out_dir);

  if (opt.overlap) {
    const Lexicon lexicon = LoadLexicon(opt.lexicon_path);
    OverlapOptions oo;
    oo.bins = opt.bins;
    const OverlapResult r = OverlapHistograms(e, lexicon, oo);
    const double p = PermutationTestGreater(r.close_values, r.far_values, opt.permutations,
                                            DeriveSeed(opt.seed, kPermutationSeed));
    const std::string hist_path = out.File("overlap_hist.tsv");
    auto hos = OpenOut(hist_path);
    WriteHistograms(hos, {"close", "far"}, {&r.close, &r.far});
    Close(hos, hist_path);
    const std::string sum_path = out.File("overlap_summary.tsv");
    auto sos = OpenOut(sum_path);
    WriteOverlapSummary(sos, r, p);
    Close(sos, sum_path);
    std::cout << fmt::format("overlap: close {:.4f} far {:.4f} p {:.4g}\n", r.mean_close, r.mean_far, p);
  }

  if (opt.blank) {
    const BlankDistanceReport r = BlankDistances(e, opt.neighbors, opt.bins);
    const std::string hist_path = out.File("blank_hist.tsv");
    auto hos = OpenOut(hist_path);
    WriteHistograms(hos, {"word_word"}, {&r.histogram});
    Close(hos, hist_path);
    const std::string means_path = out.File("blank_means.tsv");
    auto mos = OpenOut(means_path);
    WriteBlankSummary(mos, r, e);
    Close(mos, means_path);
    const std::string sum_path = out.File("blank_summary.tsv");
    auto sos = OpenOut(sum_path);
    sos << "statistic\tvalue\n";
    sos << fmt::format("k\t{}\n", r.k);
    sos << fmt::format("pooled_count\t{}\n", r.pooled.size());
    WriteStatistic(sos, "pooled_median", r.Median());
    WriteStatistic(sos, "pooled_p99", r.Percentile(99.0));
    WriteStatistic(sos, "blank_mean", r.blank_mean);
    Close(sos, sum_path);
    std::cout << fmt::format("blank: mean {:.4f} word-word median {:.4f}\n", r.blank_mean, r.Median());
  }

  if (opt.margin) {
    const Corpus train = LoadCorpus(opt.train_dir);
    std::vector<std::vector<std::string>> transcripts;
    for (const auto &u : train) transcripts.push_back(u.words);
    const FrequencyMarginTable t = FrequencyMargin(e, transcripts);
    const std::string table_path = out.File("freq_margin.tsv");
    auto tos = OpenOut(table_path);
    WriteFrequencyMargin(tos, t);
    Close(tos, table_path);
    const std::string sum_path = out.File("freq_margin_summary.tsv");
    auto sos = OpenOut(sum_path);
    sos << "statistic\tvalue\n";
    sos << fmt::format("words\t{}\n", t.rows.size());
    if (t.rank_correlation)
      WriteStatistic(sos, "spearman", *t.rank_correlation);
    else
      sos << "spearman\tundefined\n";
    Close(sos, sum_path);
    if (t.rank_correlation)
      std::cout << fmt::format("margin: spearman {:.4f}\n", *t.rank_correlation);
    else
      std::cout << "margin: spearman undefined (constant counts or margins)\n";
  }
  out.Commit();
}

}  // namespace a2w::cli
