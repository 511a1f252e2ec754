// a2w/numerics.hpp

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

#ifndef A2W_NUMERICS_HPP_
#define A2W_NUMERICS_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace a2w {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

/// log(sum(exp(v))). Exact -inf when every entry is -inf. Throws on empty
/// input.
double LogSumExp(std::span<const double> v);

/// Two-term specialization used in the CTC recursions.
inline double LogAdd(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kLogZero) return a;
  return a + std::log1p(std::exp(b - a));
}

/// Log-probabilities from logits, max-shifted. Throws on non-finite input.
Vec LogSoftmax(const Eigen::Ref<const Vec> &logits);

/// Row-wise LogSoftmax of a T x C matrix of logits.
Mat LogSoftmaxRows(const Mat &logits);

struct ClipResult {
  double norm = 0.0;    // global L2 norm before clipping
  double factor = 1.0;  // scale applied to every tensor
};

/// Global-norm gradient clipping over any number of tensors, viewed as flat
/// spans. If the joint L2 norm exceeds max_norm, every entry is scaled by
/// max_norm / norm; otherwise nothing is touched and factor is exactly 1.
ClipResult ClipGlobalNorm(std::span<const std::span<double>> tensors,
                          double max_norm);

/// Joint L2 norm of a tensor collection.
double GlobalNorm(std::span<const std::span<double>> tensors);

inline std::span<double> Flat(Mat &m) { return {m.data(), static_cast<std::size_t>(m.size())}; }
inline std::span<double> Flat(Vec &v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

}  // namespace a2w

#endif  // A2W_NUMERICS_HPP_
