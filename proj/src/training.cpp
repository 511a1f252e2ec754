// src/training.cpp

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

#include "a2w/training.hpp"

#include <fmt/format.h>

#include <cmath>
#include <iostream>
#include <limits>
#include <ostream>

#include "a2w/error.hpp"
#include "a2w/rng.hpp"

namespace a2w {

void TrainConfig::Validate() const {
  Require(phase1_epochs >= 1, "TrainConfig: phase 1 needs at least one epoch");
  Require(phase2_epochs >= 0, "TrainConfig: negative phase-2 epoch count");
  Require(phase1_lr > 0.0 && phase2_lr > 0.0, "TrainConfig: step sizes must be positive");
  Require(decay > 0.0 && decay <= 1.0, "TrainConfig: decay must be in (0, 1]");
  Require(clip_norm > 0.0, "TrainConfig: clip norm must be positive");
}

double TrainConfig::LearningRate(int phase, int epoch_in_phase) const {
  Require(epoch_in_phase >= 1, "LearningRate: epochs are 1-based");
  if (phase == 1) return phase1_lr;
  Require(phase == 2, "LearningRate: phase must be 1 or 2");
  return phase2_lr * std::pow(decay, epoch_in_phase - 1);
}

std::string TrainLog::Header() {
  return "epoch\tphase\tlr\ttrain_loss\ttrain_perplexity\tdev_metric\tskipped";
}

std::string TrainLog::FormatRecord(const EpochRecord &r) {
  return fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}", r.epoch, r.phase, r.lr, r.train_loss,
                     r.train_perplexity, r.dev_metric, r.skipped);
}

void TrainLog::Write(std::ostream &os) const {
  os << Header() << '\n';
  for (const auto &r : epochs) os << FormatRecord(r) << '\n';
}

std::size_t Dataset::LabelCount() const {
  std::size_t n = 0;
  for (const auto &ex : examples) n += ex.targets.size();
  return n;
}

Dataset MakeDataset(const Corpus &corpus, ModelMode mode, const Vocabulary &vocab,
                    const Lexicon *lexicon) {
  Dataset d;
  d.mode = mode;
  d.vocab = vocab;
  for (const auto &u : corpus) {
    Example ex{u.id, u.features, {}};
    switch (mode) {
      case ModelMode::kWordCtc:
        ex.targets = vocab.Encode(u.words);
        break;
      case ModelMode::kPhonemeCtc:
        Require(lexicon != nullptr, "MakeDataset: phoneme CTC needs a lexicon");
        ex.targets = vocab.Encode(ConvertToPhonemes(u.words, *lexicon));
        break;
      case ModelMode::kFrameClassifier:
        Require(!u.alignment.empty(), "MakeDataset: utterance '" + u.id + "' has no alignment");
        for (const auto &l : u.alignment) ex.targets.push_back(l == kSilence ? vocab.blank() : vocab.id(l));
        break;
    }
    d.examples.push_back(std::move(ex));
  }
  return d;
}

bool IsFeasible(const Network &net, const Example &ex) {
  if (ex.features.cols() != net.config().input_dim) return false;
  Eigen::Index t = ex.features.rows();
  for (int i = 0; i < net.config().total_reductions(); ++i) {
    if (t < 2) return false;
    t /= 2;
  }
  if (t < 1) return false;
  if (net.mode() == ModelMode::kFrameClassifier)
    return static_cast<Eigen::Index>(ex.targets.size()) == ex.features.rows();
  return MinFramesFor(ex.targets) <= static_cast<std::size_t>(t);
}

ExampleLoss ComputeLoss(const Network &net, const Mat &log_probs, const Example &ex) {
  ExampleLoss r;
  if (IsCtc(net.mode())) {
    CtcResult ctc = CtcForwardBackward(log_probs, ex.targets);
    r.loss = -ctc.log_likelihood;
    r.logit_grad = std::move(ctc.grad);
    return r;
  }
  Require(static_cast<Eigen::Index>(ex.targets.size()) == log_probs.rows(),
          "ComputeLoss: frame label count does not match frame count", ErrorKind::kDimensionMismatch);
  r.logit_grad = log_probs.array().exp();
  for (Eigen::Index t = 0; t < log_probs.rows(); ++t) {
    const Label k = ex.targets[static_cast<std::size_t>(t)];
    r.loss -= log_probs(t, k);
    r.logit_grad(t, k) -= 1.0;
  }
  return r;
}

std::vector<Label> Predict(const Network &net, const Mat &features) {
  const Mat lp = NetworkForward(net, features).log_probs;
  return IsCtc(net.mode()) ? GreedyDecode(lp) : ArgmaxRows(lp);
}

double EvaluateErrorRate(const Network &net, const Dataset &data) {
  Require(!data.empty(), "EvaluateErrorRate: empty dataset");
  EditStats pooled;
  for (const auto &ex : data.examples) {
    if (!IsFeasible(net, ex)) {
      // Nothing can be emitted for it: every reference label is an error.
      pooled.deletions += ex.targets.size();
      pooled.ref_length += ex.targets.size();
      continue;
    }
    const auto hyp = Predict(net, ex.features);
    if (IsCtc(net.mode())) {
      pooled += EditDistance(ex.targets, hyp);
    } else {
      for (std::size_t t = 0; t < hyp.size(); ++t) pooled.substitutions += hyp[t] != ex.targets[t];
      pooled.ref_length += hyp.size();
    }
  }
  return ErrorRate(pooled);
}

double TrainingPerplexity(const Network &net, const Dataset &data) {
  Require(!data.empty(), "TrainingPerplexity: empty dataset");
  double nll = 0.0;
  std::size_t labels = 0;
  for (const auto &ex : data.examples) {
    labels += ex.targets.size();
    if (!IsFeasible(net, ex)) {
      nll = std::numeric_limits<double>::infinity();
      continue;
    }
    const Mat lp = NetworkForward(net, ex.features).log_probs;
    if (IsCtc(net.mode())) {
      nll -= CtcLogLikelihood(lp, ex.targets);
    } else {
      for (Eigen::Index t = 0; t < lp.rows(); ++t) nll -= lp(t, ex.targets[static_cast<std::size_t>(t)]);
    }
  }
  Require(labels > 0, "TrainingPerplexity: dataset has no labels");
  return nll / static_cast<double>(labels);
}

namespace {

void CheckCompatible(const Network &model, const Dataset &data, const char *which) {
  Require(!data.empty(), std::string("Train: empty ") + which + " set");
  Require(data.mode == model.mode(), std::string("Train: ") + which + " set is for mode " +
                                         ToString(data.mode) + ", model is " + ToString(model.mode()));
  Require(data.vocab == model.vocab(), std::string("Train: ") + which +
                                           " set vocabulary differs from the model's");
}

}  // namespace

TrainResult Train(Network model, const Dataset &train, const Dataset &dev, const TrainConfig &cfg,
                  const TrainHooks &hooks) {
  cfg.Validate();
  CheckCompatible(model, train, "training");
  CheckCompatible(model, dev, "dev");
  std::function<void(const std::string &)> warn = hooks.warn;
  if (!warn) warn = [](const std::string &m) { std::cerr << "WARNING: " << m << '\n'; };

  TrainResult result;
  bool have_best = false;
  int global_epoch = 0;

  auto run_epoch = [&](int phase, int epoch_in_phase) {
    ++global_epoch;
    EpochRecord rec;
    rec.epoch = global_epoch;
    rec.phase = phase;
    rec.lr = cfg.LearningRate(phase, epoch_in_phase);

    Rng shuffler(DeriveSeed(cfg.seed, static_cast<std::uint64_t>(global_epoch)));
    const auto order = shuffler.Permutation(train.examples.size());
    double nll = 0.0;
    std::size_t labels = 0, accepted = 0;
    for (std::size_t idx : order) {
      const Example &ex = train.examples[idx];
      if (!IsFeasible(model, ex)) {
        ++rec.skipped;
        warn("skipping '" + ex.id + "': target cannot be aligned to the available frames");
        continue;
      }
      ForwardResult fwd = NetworkForward(model, ex.features);
      ExampleLoss loss;
      try {
        loss = ComputeLoss(model, fwd.log_probs, ex);
      } catch (const InfeasibleTargetError &e) {
        ++rec.skipped;
        warn("skipping '" + ex.id + "': " + e.what());
        continue;
      }
      BackwardResult bwd = NetworkBackward(model, fwd.tape, loss.logit_grad);
      auto spans = bwd.params.Spans();
      const ClipResult clip = ClipGlobalNorm(spans, cfg.clip_norm);
      if (clip.factor < 1.0) ++rec.clipped;
      rec.max_update_norm = std::max(rec.max_update_norm, rec.lr * clip.norm * clip.factor);
      model.ApplyGradients(bwd.params, rec.lr);

      nll += loss.loss;
      labels += ex.targets.size();
      ++accepted;
    }
    if (accepted == 0)
      throw InfeasibleTargetError("Train: every training utterance was infeasible in epoch " +
                                  std::to_string(global_epoch));
    rec.train_loss = nll / static_cast<double>(accepted);
    rec.train_perplexity = labels > 0 ? nll / static_cast<double>(labels) : 0.0;
    rec.dev_metric = EvaluateErrorRate(model, dev);
    result.log.epochs.push_back(rec);
    if (hooks.on_epoch) hooks.on_epoch(rec);
    if (!have_best || rec.dev_metric < result.best_dev_metric) {
      have_best = true;
      result.best = model;
      result.best_epoch = rec.epoch;
      result.best_dev_metric = rec.dev_metric;
    }
  };

  for (int e = 1; e <= cfg.phase1_epochs; ++e) run_epoch(1, e);
  model = result.best;
  for (int e = 1; e <= cfg.phase2_epochs; ++e) run_epoch(2, e);
  return result;
}

}  // namespace a2w
