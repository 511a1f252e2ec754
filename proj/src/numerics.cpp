// src/numerics.cpp

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

#include "a2w/numerics.hpp"

#include <algorithm>
#include <cmath>

#include "a2w/error.hpp"

namespace a2w {

double LogSumExp(std::span<const double> v) {
  Require(!v.empty(), "LogSumExp: empty input");
  const double max = *std::max_element(v.begin(), v.end());
  if (max == kLogZero) return kLogZero;
  if (std::isinf(max)) return max;  // +inf dominates
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - max);
  return max + std::log(sum);
}

Vec LogSoftmax(const Eigen::Ref<const Vec> &logits) {
  Require(logits.size() > 0, "LogSoftmax: empty input");
  Require(logits.allFinite(), "LogSoftmax: non-finite logit");
  const double max = logits.maxCoeff();
  Vec shifted = logits.array() - max;
  const double lse = std::log(shifted.array().exp().sum());
  return shifted.array() - lse;
}

Mat LogSoftmaxRows(const Mat &logits) {
  Mat out(logits.rows(), logits.cols());
  for (Eigen::Index t = 0; t < logits.rows(); ++t)
    out.row(t) = LogSoftmax(logits.row(t).transpose()).transpose();
  return out;
}

double GlobalNorm(std::span<const std::span<double>> tensors) {
  double sq = 0.0;
  for (const auto &t : tensors)
    for (double x : t) sq += x * x;
  return std::sqrt(sq);
}

ClipResult ClipGlobalNorm(std::span<const std::span<double>> tensors,
                          double max_norm) {
  Require(max_norm > 0.0, "ClipGlobalNorm: max_norm must be positive");
  ClipResult r;
  r.norm = GlobalNorm(tensors);
  if (r.norm <= max_norm) return r;
  r.factor = max_norm / r.norm;
  for (const auto &t : tensors)
    for (double &x : t) x *= r.factor;
  return r;
}

}  // namespace a2w
