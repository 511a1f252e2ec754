// a2w/ctc.hpp

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

#ifndef A2W_CTC_HPP_
#define A2W_CTC_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "a2w/numerics.hpp"

namespace a2w {

using Label = int;
using LabelSequence = std::vector<Label>;
using AlignmentPath = std::vector<Label>;

/// T' x (V+1) per-frame log-probabilities; the last column is the blank.
using LogProbLattice = Mat;

/// Ordered label inventory. Ids are 0..V-1; the reserved blank (or, for frame
/// classifiers, the silence class) takes id V, so the output layer is V+1
/// wide.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> labels);

  std::size_t size() const { return labels_.size(); }
  std::size_t output_dim() const { return labels_.size() + 1; }
  Label blank() const { return static_cast<Label>(labels_.size()); }

  const std::vector<std::string> &labels() const { return labels_; }
  const std::string &label(Label id) const;

  /// Id for a label string; throws ErrorKind::kUnknownLabel naming it.
  Label id(const std::string &label) const;
  std::optional<Label> find(const std::string &label) const;

  LabelSequence Encode(const std::vector<std::string> &words) const;
  std::vector<std::string> Decode(const LabelSequence &ids) const;

  bool operator==(const Vocabulary &other) const { return labels_ == other.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, Label> index_;
};

/// Merges runs of identical symbols, then drops blanks.
LabelSequence Collapse(const AlignmentPath &path, Label blank);

/// Every length-T path over {0..blank} that collapses to y. Exhaustive
/// depth-first construction; meant as a test oracle, so T is capped at
/// max_frames.
std::vector<AlignmentPath> EnumeratePreimage(const LabelSequence &y, std::size_t frames,
                                             Label blank, std::size_t max_frames = 10);

/// Smallest T for which y has at least one alignment: K plus one separating
/// blank per adjacent repeat.
std::size_t MinFramesFor(const LabelSequence &y);

/// log p(y|x) from the forward (alpha) recursion over the 2K+1 blank-
/// interleaved states. -inf when y has no alignment of length T'.
double CtcLogLikelihood(const LogProbLattice &lattice, const LabelSequence &y);

struct CtcResult {
  double log_likelihood = kLogZero;
  /// d(-log p(y|x)) / d(logits), same shape as the lattice. Assumes the
  /// lattice is a row-wise log-softmax of those logits.
  Mat grad;
};

/// Likelihood plus gradient via alpha-beta. Throws InfeasibleTargetError when
/// p(y|x) = 0.
CtcResult CtcForwardBackward(const LogProbLattice &lattice, const LabelSequence &y);

inline Mat CtcGradient(const LogProbLattice &lattice, const LabelSequence &y) {
  return CtcForwardBackward(lattice, y).grad;
}

/// Best-path decoding: row-wise argmax (lowest index wins ties; blank is the
/// last index) followed by Collapse.
LabelSequence GreedyDecode(const LogProbLattice &lattice);

/// Row-wise argmax with the same tie rule, no collapse.
std::vector<Label> ArgmaxRows(const Mat &scores);

}  // namespace a2w

#endif  // A2W_CTC_HPP_
