// a2w/training.hpp

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

#ifndef A2W_TRAINING_HPP_
#define A2W_TRAINING_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "a2w/ctc.hpp"
#include "a2w/data_io.hpp"
#include "a2w/metrics.hpp"
#include "a2w/network.hpp"

namespace a2w {

/// SGD recipe: phase 1 at a fixed step size, then the dev-best phase-1 model
/// continues for phase 2 at phase2_lr * decay^(e-1) in phase-2 epoch e.
struct TrainConfig {
  int phase1_epochs = 20;
  double phase1_lr = 0.05;
  int phase2_epochs = 20;
  double phase2_lr = 0.0375;
  double decay = 0.75;
  double clip_norm = 5.0;
  std::uint64_t seed = 1;

  void Validate() const;
  /// Step size for 1-based epoch index within a phase (1 or 2).
  double LearningRate(int phase, int epoch_in_phase) const;
};

struct EpochRecord {
  int epoch = 0;  // 1-based, across both phases
  int phase = 1;
  double lr = 0.0;
  double train_loss = 0.0;        // mean -log p(y|x) per accepted utterance
  double train_perplexity = 0.0;  // summed -log p over summed label count
  double dev_metric = 0.0;        // WER / PER / FER (%)
  std::size_t skipped = 0;
  std::size_t clipped = 0;          // updates whose gradient norm exceeded the clip
  double max_update_norm = 0.0;     // largest lr * ||clipped gradient||

  bool operator==(const EpochRecord &) const = default;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;

  /// Header line, then one tab-separated record per epoch in the order
  /// epoch, phase, lr, train_loss, train_perplexity, dev_metric, skipped.
  void Write(std::ostream &os) const;
  static std::string Header();
  static std::string FormatRecord(const EpochRecord &r);
};

/// One training pair. For CTC modes targets is the label sequence; for frame
/// classifiers it holds one label per frame (silence = vocab.blank()).
struct Example {
  std::string id;
  Mat features;
  std::vector<Label> targets;
};

struct Dataset {
  ModelMode mode = ModelMode::kWordCtc;
  Vocabulary vocab;
  std::vector<Example> examples;

  std::size_t LabelCount() const;
  bool empty() const { return examples.empty(); }
};

/// Builds a dataset for the given mode. Word modes use the transcript (or
/// the alignment, for frame classifiers) against vocab; phoneme CTC converts
/// the transcript through the lexicon and encodes against the phoneme vocab.
Dataset MakeDataset(const Corpus &corpus, ModelMode mode, const Vocabulary &vocab,
                    const Lexicon *lexicon = nullptr);

/// Loss for one example and its gradient with respect to the output logits.
struct ExampleLoss {
  double loss = 0.0;  // -log p(y|x), or summed frame cross entropy
  Mat logit_grad;
};

/// Throws InfeasibleTargetError when the example cannot be scored (too few
/// frames after down-sampling).
ExampleLoss ComputeLoss(const Network &net, const Mat &log_probs, const Example &ex);

/// Whether the example survives the network's down-sampling with enough
/// frames for its target.
bool IsFeasible(const Network &net, const Example &ex);

/// Hypothesis for one example: collapsed greedy path for CTC, per-frame
/// argmax for the frame classifier.
std::vector<Label> Predict(const Network &net, const Mat &features);

/// Pooled error rate (%) over a dataset.
double EvaluateErrorRate(const Network &net, const Dataset &data);

/// Summed -log p(y|x) over summed label count (frame count for frame
/// classifiers). Not exponentiated.
double TrainingPerplexity(const Network &net, const Dataset &data);

struct TrainHooks {
  std::function<void(const EpochRecord &)> on_epoch;
  std::function<void(const std::string &)> warn;
};

struct TrainResult {
  Network best;
  TrainLog log;
  int best_epoch = 0;
  double best_dev_metric = 0.0;
};

/// Per-utterance SGD with global-norm clipping, seeded per-epoch shuffles and
/// dev-based model selection across both phases.
TrainResult Train(Network model, const Dataset &train, const Dataset &dev, const TrainConfig &cfg,
                  const TrainHooks &hooks = {});

}  // namespace a2w

#endif  // A2W_TRAINING_HPP_
