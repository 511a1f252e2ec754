// tools/commands.hpp

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

#ifndef A2W_TOOLS_COMMANDS_HPP_
#define A2W_TOOLS_COMMANDS_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "a2w/data_io.hpp"

namespace a2w::cli {

/// Files and directories produced by one command. Anything registered is
/// deleted again unless Commit() is reached.
class OutputSet {
 public:
  explicit OutputSet(const std::string &dir);
  ~OutputSet();
  OutputSet(const OutputSet &) = delete;
  OutputSet &operator=(const OutputSet &) = delete;

  std::string File(const std::string &name);
  std::string Dir(const std::string &name);
  void Commit() { committed_ = true; }

 private:
  std::filesystem::path root_;
  bool created_root_ = false;
  bool committed_ = false;
  std::vector<std::filesystem::path> paths_;
};

struct SynthOptions {
  SynthConfig config;
  std::string out_dir;
};

struct TrainOptions {
  std::string mode = "word-ctc";
  std::string train_dir;
  std::string dev_dir;  // empty: split the training corpus
  double train_fraction = 0.9;
  std::string vocab_path;
  std::string lexicon_path;
  int downsample = 1;
  std::string downsample_at = "layers";  // or "input"
  int layers = 4;
  int hidden = 500;
  std::string init_from;
  int init_layers = 3;
  double data_fraction = 1.0;
  std::uint64_t seed = 1;
  int phase1_epochs = 20;
  double phase1_lr = 0.05;
  int phase2_epochs = 20;
  double phase2_lr = 0.0375;
  double decay = 0.75;
  double clip = 5.0;
  bool quiet = false;
  std::string out_dir;
};

struct DecodeOptions {
  std::string model;
  std::string data_dir;
  std::string lexicon_path;
  std::string out_dir;
};

struct ScoreOptions {
  std::string ref;
  std::string hyp;
  std::string metric = "wer";
  std::string out_dir;
};

struct AnalyzeOptions {
  std::string model;
  std::string lexicon_path;
  std::string train_dir;
  bool overlap = false;
  bool blank = false;
  bool margin = false;
  std::size_t permutations = 10000;
  std::size_t neighbors = 25;
  std::size_t bins = 20;
  std::uint64_t seed = 1;
  std::string out_dir;
};

void RunSynth(const SynthOptions &opt);
void RunTrain(const TrainOptions &opt);
void RunDecode(const DecodeOptions &opt);
void RunScore(const ScoreOptions &opt);
void RunAnalyze(const AnalyzeOptions &opt);

}  // namespace a2w::cli

#endif  // A2W_TOOLS_COMMANDS_HPP_
