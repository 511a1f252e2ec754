// a2w/metrics.hpp

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

#ifndef A2W_METRICS_HPP_
#define A2W_METRICS_HPP_

#include <algorithm>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "a2w/error.hpp"

namespace a2w {

struct EditStats {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t ref_length = 0;

  std::size_t errors() const { return substitutions + deletions + insertions; }
  EditStats &operator+=(const EditStats &o) {
    substitutions += o.substitutions;
    deletions += o.deletions;
    insertions += o.insertions;
    ref_length += o.ref_length;
    return *this;
  }
  bool operator==(const EditStats &) const = default;
};

/// Levenshtein alignment of hyp against ref. Among minimum-cost alignments the
/// backtrace prefers, at every step, a substitution (or match) over an
/// insertion over a deletion.
template <typename T>
EditStats EditDistance(const std::vector<T> &ref, const std::vector<T> &hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  std::vector<std::size_t> cost((n + 1) * (m + 1));
  auto at = [m](std::size_t i, std::size_t j) { return i * (m + 1) + j; };
  for (std::size_t i = 0; i <= n; ++i) cost[at(i, 0)] = i;
  for (std::size_t j = 0; j <= m; ++j) cost[at(0, j)] = j;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t diag = cost[at(i - 1, j - 1)] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      const std::size_t ins = cost[at(i, j - 1)] + 1;
      const std::size_t del = cost[at(i - 1, j)] + 1;
      cost[at(i, j)] = std::min(diag, std::min(ins, del));
    }

  EditStats s;
  s.ref_length = n;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    const std::size_t here = cost[at(i, j)];
    if (i > 0 && j > 0) {
      const bool same = ref[i - 1] == hyp[j - 1];
      if (cost[at(i - 1, j - 1)] + (same ? 0 : 1) == here) {
        if (!same) ++s.substitutions;
        --i, --j;
        continue;
      }
    }
    if (j > 0 && cost[at(i, j - 1)] + 1 == here) {
      ++s.insertions;
      --j;
    } else {
      ++s.deletions;
      --i;
    }
  }
  return s;
}

/// 100 * (S + D + I) / N. Throws on an empty reference.
double ErrorRate(const EditStats &stats);

/// 100 * mismatched / total. Throws on length mismatch or empty input.
template <typename T>
double FrameErrorRate(const std::vector<T> &ref, const std::vector<T> &hyp) {
  if (ref.size() != hyp.size())
    Fail(ErrorKind::kDimensionMismatch, "FrameErrorRate: " + std::to_string(ref.size()) +
                                            " reference frames vs " + std::to_string(hyp.size()) +
                                            " hypothesis frames");
  Require(!ref.empty(), "FrameErrorRate: no frames");
  std::size_t bad = 0;
  for (std::size_t t = 0; t < ref.size(); ++t) bad += ref[t] != hyp[t];
  return 100.0 * static_cast<double>(bad) / static_cast<double>(ref.size());
}

/// Corpus scoring: one row per utterance and pooled counts over all of them.
struct ScoreReport {
  struct Row {
    std::string id;
    EditStats stats;
  };
  std::vector<Row> rows;
  EditStats pooled;

  void Add(std::string id, const EditStats &s) {
    rows.push_back({std::move(id), s});
    pooled += s;
  }
  double PooledRate() const { return ErrorRate(pooled); }

  /// Tab-separated: header, one line per utterance, final "TOTAL" line.
  void Write(std::ostream &os) const;
};

}  // namespace a2w

#endif  // A2W_METRICS_HPP_
