// a2w/analysis.hpp

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

#ifndef A2W_ANALYSIS_HPP_
#define A2W_ANALYSIS_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "a2w/ctc.hpp"
#include "a2w/data_io.hpp"
#include "a2w/network.hpp"

namespace a2w {

/// Softmax weight rows, one per word plus the blank in the last row. The
/// output bias is not part of the embedding.
struct EmbeddingMatrix {
  Mat rows;  // (V+1) x H
  Vocabulary vocab;

  static EmbeddingMatrix FromNetwork(const Network &net);

  std::size_t word_count() const { return vocab.size(); }
  Label blank() const { return vocab.blank(); }
  /// Word id, or the blank for "<blk>".
  Label Id(const std::string &word) const;
  std::string Name(Label id) const;
};

inline const std::string kBlankName = "<blk>";

enum class NeighborScope {
  kAllRows,    // every other row, the blank included
  kWordsOnly,  // word rows only
};

struct Neighbor {
  Label id;
  double distance;
};
using NeighborList = std::vector<Neighbor>;

double L2Distance(const Mat &rows, Label a, Label b);

/// The k nearest rows to `query` by Euclidean distance, ascending, the query
/// itself excluded, ties broken by lower id.
NeighborList Neighbors(const EmbeddingMatrix &e, Label query, std::size_t k,
                       NeighborScope scope = NeighborScope::kAllRows);
NeighborList Neighbors(const EmbeddingMatrix &e, const std::string &word, std::size_t k,
                       NeighborScope scope = NeighborScope::kAllRows);

/// Distance to the first nearest neighbor.
double Margin(const EmbeddingMatrix &e, Label id);
double Margin(const EmbeddingMatrix &e, const std::string &word);

/// Phoneme tokens shared by the two canonical pronunciations (multiset
/// intersection) divided by the shorter pronunciation's length.
double PronunciationOverlap(const std::vector<std::string> &a, const std::vector<std::string> &b);
double PronunciationOverlap(const std::string &w1, const std::string &w2, const Lexicon &lexicon);

struct Histogram {
  std::vector<double> edges;  // bins + 1 ascending edges
  std::vector<std::size_t> counts;

  static Histogram Uniform(double lo, double hi, std::size_t bins);
  /// Values outside [lo, hi] are clamped into the end bins; hi itself lands
  /// in the last bin.
  void Add(double v);
  std::size_t total() const;
};

struct OverlapOptions {
  std::size_t close_first = 1, close_last = 3;
  std::size_t far_first = 48, far_last = 50;
  std::size_t bins = 20;
};

struct OverlapResult {
  Histogram close, far;
  std::vector<double> close_values, far_values;
  double mean_close = 0.0, mean_far = 0.0;
  std::size_t skipped_blank = 0;  // neighbor slots occupied by the blank
};

/// For every word, overlaps with its neighbors at the close and far ranks.
/// Ranks count over all other rows of the matrix (so the blank can take a
/// slot; such pairs have no pronunciation and are skipped). Requires
/// far_last + 1 rows.
OverlapResult OverlapHistograms(const EmbeddingMatrix &e, const Lexicon &lexicon,
                                const OverlapOptions &opt = {});

/// One-sided permutation test of mean(a) > mean(b). Returns
/// (1 + #{permuted statistic >= observed}) / (1 + permutations).
double PermutationTestGreater(const std::vector<double> &a, const std::vector<double> &b,
                              std::size_t permutations, std::uint64_t seed);

struct BlankDistanceReport {
  std::size_t k = 25;
  std::vector<double> pooled;         // every word's k nearest word-word distances
  std::vector<double> per_word_mean;  // indexed by word id
  double blank_mean = 0.0;            // blank to its k nearest words
  Histogram histogram;

  double Median() const { return Percentile(50.0); }
  /// Linear interpolation between order statistics.
  double Percentile(double p) const;
};

/// Requires at least k + 1 words.
BlankDistanceReport BlankDistances(const EmbeddingMatrix &e, std::size_t k = 25,
                                   std::size_t bins = 20);

struct FrequencyMarginRow {
  std::string word;
  std::size_t count = 0;
  double margin = 0.0;
};

struct FrequencyMarginTable {
  std::vector<FrequencyMarginRow> rows;  // vocabulary order
  /// Spearman correlation of count and margin; empty when either side is
  /// constant.
  std::optional<double> rank_correlation;
};

FrequencyMarginTable FrequencyMargin(const EmbeddingMatrix &e,
                                     const std::vector<std::vector<std::string>> &transcripts);

/// Average ranks (1-based) with ties sharing the mean rank.
std::vector<double> Ranks(const std::vector<double> &v);
std::optional<double> SpearmanCorrelation(const std::vector<double> &x, const std::vector<double> &y);

// Tab-separated writers, each with a one-line header.
void WriteHistograms(std::ostream &os, const std::vector<std::string> &names,
                     const std::vector<const Histogram *> &hists);
void WriteOverlapSummary(std::ostream &os, const OverlapResult &r, double p_value);
void WriteBlankSummary(std::ostream &os, const BlankDistanceReport &r, const EmbeddingMatrix &e);
void WriteFrequencyMargin(std::ostream &os, const FrequencyMarginTable &t);

}  // namespace a2w

#endif  // A2W_ANALYSIS_HPP_
