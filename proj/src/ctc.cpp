// src/ctc.cpp

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

#include "a2w/ctc.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "a2w/error.hpp"

namespace a2w {

Vocabulary::Vocabulary(std::vector<std::string> labels) : labels_(std::move(labels)) {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    Require(!labels_[i].empty(), "Vocabulary: empty label");
    const bool fresh = index_.emplace(labels_[i], static_cast<Label>(i)).second;
    Require(fresh, "Vocabulary: duplicate label '" + labels_[i] + "'");
  }
}

const std::string &Vocabulary::label(Label id) const {
  Require(id >= 0 && static_cast<std::size_t>(id) < labels_.size(),
          "Vocabulary: label id " + std::to_string(id) + " out of range",
          ErrorKind::kUnknownLabel);
  return labels_[static_cast<std::size_t>(id)];
}

std::optional<Label> Vocabulary::find(const std::string &label) const {
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Label Vocabulary::id(const std::string &label) const {
  auto found = find(label);
  if (!found) Fail(ErrorKind::kUnknownLabel, "unknown label '" + label + "'");
  return *found;
}

LabelSequence Vocabulary::Encode(const std::vector<std::string> &words) const {
  LabelSequence out;
  out.reserve(words.size());
  for (const auto &w : words) out.push_back(id(w));
  return out;
}

std::vector<std::string> Vocabulary::Decode(const LabelSequence &ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (Label id : ids) out.push_back(label(id));
  return out;
}

LabelSequence Collapse(const AlignmentPath &path, Label blank) {
  LabelSequence out;
  Label prev = -1;
  for (Label z : path) {
    if (z != prev && z != blank) out.push_back(z);
    prev = z;
  }
  return out;
}

std::size_t MinFramesFor(const LabelSequence &y) {
  std::size_t n = y.size();
  for (std::size_t k = 1; k < y.size(); ++k)
    if (y[k] == y[k - 1]) ++n;
  return n;
}

namespace {

void CheckTarget(const LabelSequence &y, Label blank) {
  for (Label l : y) {
    if (l == blank) Fail(ErrorKind::kInvalidArgument, "CTC target contains the blank symbol");
    Require(l >= 0 && l < blank, "CTC target label " + std::to_string(l) + " out of range");
  }
}

// Label of interleaved state s: blanks at even positions.
inline Label StateLabel(const LabelSequence &y, Label blank, Eigen::Index s) {
  return (s % 2 == 0) ? blank : y[static_cast<std::size_t>(s / 2)];
}

// Whether state s may be entered from s-2 (skipping the blank between two
// distinct labels).
inline bool CanSkip(const LabelSequence &y, Label blank, Eigen::Index s) {
  if (s < 2 || s % 2 == 0) return false;
  return StateLabel(y, blank, s) != StateLabel(y, blank, s - 2);
}

// T x S matrix of log alphas.
Mat Alpha(const LogProbLattice &lp, const LabelSequence &y, Label blank) {
  const Eigen::Index frames = lp.rows();
  const Eigen::Index states = 2 * static_cast<Eigen::Index>(y.size()) + 1;
  Mat alpha = Mat::Constant(frames, states, kLogZero);
  alpha(0, 0) = lp(0, blank);
  if (states > 1) alpha(0, 1) = lp(0, y[0]);
  for (Eigen::Index t = 1; t < frames; ++t) {
    // States that cannot reach the end in the remaining frames stay at -inf
    // through the recursion naturally; no explicit window is needed.
    for (Eigen::Index s = 0; s < states; ++s) {
      double acc = alpha(t - 1, s);
      if (s >= 1) acc = LogAdd(acc, alpha(t - 1, s - 1));
      if (CanSkip(y, blank, s)) acc = LogAdd(acc, alpha(t - 1, s - 2));
      if (acc != kLogZero) acc += lp(t, StateLabel(y, blank, s));
      alpha(t, s) = acc;
    }
  }
  return alpha;
}

Mat Beta(const LogProbLattice &lp, const LabelSequence &y, Label blank) {
  const Eigen::Index frames = lp.rows();
  const Eigen::Index states = 2 * static_cast<Eigen::Index>(y.size()) + 1;
  Mat beta = Mat::Constant(frames, states, kLogZero);
  beta(frames - 1, states - 1) = lp(frames - 1, blank);
  if (states > 1) beta(frames - 1, states - 2) = lp(frames - 1, y.back());
  for (Eigen::Index t = frames - 2; t >= 0; --t) {
    for (Eigen::Index s = 0; s < states; ++s) {
      double acc = beta(t + 1, s);
      if (s + 1 < states) acc = LogAdd(acc, beta(t + 1, s + 1));
      if (s + 2 < states && CanSkip(y, blank, s + 2)) acc = LogAdd(acc, beta(t + 1, s + 2));
      if (acc != kLogZero) acc += lp(t, StateLabel(y, blank, s));
      beta(t, s) = acc;
    }
  }
  return beta;
}

double FinalLogLikelihood(const Mat &alpha) {
  const Eigen::Index last = alpha.rows() - 1;
  const Eigen::Index states = alpha.cols();
  double ll = alpha(last, states - 1);
  if (states > 1) ll = LogAdd(ll, alpha(last, states - 2));
  return ll;
}

}  // namespace

std::vector<AlignmentPath> EnumeratePreimage(const LabelSequence &y, std::size_t frames,
                                             Label blank, std::size_t max_frames) {
  Require(frames <= max_frames, "EnumeratePreimage: T=" + std::to_string(frames) +
                                    " exceeds the oracle bound " + std::to_string(max_frames));
  CheckTarget(y, blank);
  std::vector<AlignmentPath> out;
  AlignmentPath path;
  path.reserve(frames);

  // Frames still needed to emit y[j..] when the previous symbol is `last`.
  auto needed = [&](std::size_t j, Label last) {
    if (j >= y.size()) return std::size_t{0};
    std::size_t n = y.size() - j;
    if (y[j] == last) ++n;
    for (std::size_t k = j + 1; k < y.size(); ++k)
      if (y[k] == y[k - 1]) ++n;
    return n;
  };

  std::function<void(std::size_t, Label)> extend = [&](std::size_t j, Label last) {
    const std::size_t t = path.size();
    if (t == frames) {
      if (j == y.size()) out.push_back(path);
      return;
    }
    if (needed(j, last) > frames - t) return;
    // Candidate symbols in ascending id order: the next label, a repeat of
    // the current one, or a blank.
    std::vector<std::pair<Label, std::size_t>> moves;
    if (j < y.size() && y[j] != last) moves.emplace_back(y[j], j + 1);
    if (last != blank && last >= 0) moves.emplace_back(last, j);
    moves.emplace_back(blank, j);
    std::sort(moves.begin(), moves.end());
    for (auto [sym, next_j] : moves) {
      path.push_back(sym);
      extend(next_j, sym);
      path.pop_back();
    }
  };
  extend(0, -1);
  return out;
}

double CtcLogLikelihood(const LogProbLattice &lattice, const LabelSequence &y) {
  const Label blank = static_cast<Label>(lattice.cols()) - 1;
  Require(blank >= 0, "CtcLogLikelihood: lattice has no columns");
  CheckTarget(y, blank);
  if (lattice.rows() == 0) return y.empty() ? 0.0 : kLogZero;
  if (MinFramesFor(y) > static_cast<std::size_t>(lattice.rows())) return kLogZero;
  return FinalLogLikelihood(Alpha(lattice, y, blank));
}

CtcResult CtcForwardBackward(const LogProbLattice &lattice, const LabelSequence &y) {
  const Label blank = static_cast<Label>(lattice.cols()) - 1;
  Require(blank >= 0, "CtcForwardBackward: lattice has no columns");
  CheckTarget(y, blank);
  const Eigen::Index frames = lattice.rows();
  if (frames == 0 || MinFramesFor(y) > static_cast<std::size_t>(frames))
    throw InfeasibleTargetError("CTC target of length " + std::to_string(y.size()) +
                                " has no alignment over " + std::to_string(frames) + " frames");

  const Mat alpha = Alpha(lattice, y, blank);
  const Mat beta = Beta(lattice, y, blank);
  CtcResult r;
  r.log_likelihood = FinalLogLikelihood(alpha);
  if (!std::isfinite(r.log_likelihood))
    throw InfeasibleTargetError("CTC target has zero probability under the lattice");

  // grad = softmax - occupancy. Occupancy of state s at t is
  // alpha * beta / p, with the emission at t counted once.
  r.grad = lattice.array().exp();
  const Eigen::Index states = alpha.cols();
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (Eigen::Index s = 0; s < states; ++s) {
      const double a = alpha(t, s), b = beta(t, s);
      if (a == kLogZero || b == kLogZero) continue;
      const Label k = StateLabel(y, blank, s);
      r.grad(t, k) -= std::exp(a + b - lattice(t, k) - r.log_likelihood);
    }
  }
  return r;
}

std::vector<Label> ArgmaxRows(const Mat &scores) {
  std::vector<Label> out(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index t = 0; t < scores.rows(); ++t) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < scores.cols(); ++k)
      if (scores(t, k) > scores(t, best)) best = k;
    out[static_cast<std::size_t>(t)] = static_cast<Label>(best);
  }
  return out;
}

LabelSequence GreedyDecode(const LogProbLattice &lattice) {
  Require(lattice.cols() > 0, "GreedyDecode: empty lattice");
  return Collapse(ArgmaxRows(lattice), static_cast<Label>(lattice.cols()) - 1);
}

}  // namespace a2w
