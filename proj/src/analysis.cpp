// src/analysis.cpp

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

#include "a2w/analysis.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "a2w/error.hpp"
#include "a2w/rng.hpp"

namespace a2w {

EmbeddingMatrix EmbeddingMatrix::FromNetwork(const Network &net) {
  return {net.output_weights(), net.vocab()};
}

Label EmbeddingMatrix::Id(const std::string &word) const {
  if (word == kBlankName) return blank();
  return vocab.id(word);
}

std::string EmbeddingMatrix::Name(Label id) const {
  return id == blank() ? kBlankName : vocab.label(id);
}

double L2Distance(const Mat &rows, Label a, Label b) {
  double sq = 0.0;
  for (Eigen::Index j = 0; j < rows.cols(); ++j) {
    const double d = rows(a, j) - rows(b, j);
    sq += d * d;
  }
  return std::sqrt(sq);
}

NeighborList Neighbors(const EmbeddingMatrix &e, Label query, std::size_t k, NeighborScope scope) {
  const auto n_rows = static_cast<Label>(e.rows.rows());
  Require(static_cast<std::size_t>(n_rows) == e.vocab.output_dim(),
          "Neighbors: embedding rows do not match the vocabulary", ErrorKind::kDimensionMismatch);
  Require(query >= 0 && query < n_rows, "Neighbors: query id out of range", ErrorKind::kUnknownLabel);
  NeighborList all;
  for (Label id = 0; id < n_rows; ++id) {
    if (id == query) continue;
    if (scope == NeighborScope::kWordsOnly && id == e.blank()) continue;
    all.push_back({id, L2Distance(e.rows, query, id)});
  }
  Require(k <= all.size(), "Neighbors: k=" + std::to_string(k) + " exceeds the " +
                               std::to_string(all.size()) + " candidate rows");
  auto less = [](const Neighbor &a, const Neighbor &b) {
    return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), less);
  all.resize(k);
  return all;
}

NeighborList Neighbors(const EmbeddingMatrix &e, const std::string &word, std::size_t k,
                       NeighborScope scope) {
  return Neighbors(e, e.Id(word), k, scope);
}

double Margin(const EmbeddingMatrix &e, Label id) {
  Require(e.rows.rows() >= 2, "Margin: need at least two rows");
  return Neighbors(e, id, 1).front().distance;
}

double Margin(const EmbeddingMatrix &e, const std::string &word) { return Margin(e, e.Id(word)); }

double PronunciationOverlap(const std::vector<std::string> &a, const std::vector<std::string> &b) {
  Require(!a.empty() && !b.empty(), "PronunciationOverlap: empty pronunciation");
  std::map<std::string, int> count;
  for (const auto &p : a) ++count[p];
  std::size_t shared = 0;
  for (const auto &p : b) {
    auto it = count.find(p);
    if (it != count.end() && it->second > 0) {
      --it->second;
      ++shared;
    }
  }
  return static_cast<double>(shared) / static_cast<double>(std::min(a.size(), b.size()));
}

double PronunciationOverlap(const std::string &w1, const std::string &w2, const Lexicon &lexicon) {
  return PronunciationOverlap(lexicon.Pronunciation(w1), lexicon.Pronunciation(w2));
}

Histogram Histogram::Uniform(double lo, double hi, std::size_t bins) {
  Require(bins >= 1, "Histogram: need at least one bin");
  Require(hi > lo, "Histogram: empty range");
  Histogram h;
  for (std::size_t i = 0; i <= bins; ++i)
    h.edges.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins));
  h.counts.assign(bins, 0);
  return h;
}

void Histogram::Add(double v) {
  const std::size_t bins = counts.size();
  const double lo = edges.front(), hi = edges.back();
  auto bin = static_cast<std::ptrdiff_t>(std::floor((v - lo) / (hi - lo) * static_cast<double>(bins)));
  bin = std::clamp<std::ptrdiff_t>(bin, 0, static_cast<std::ptrdiff_t>(bins) - 1);
  ++counts[static_cast<std::size_t>(bin)];
}

std::size_t Histogram::total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

namespace {

double Mean(const std::vector<double> &v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

OverlapResult OverlapHistograms(const EmbeddingMatrix &e, const Lexicon &lexicon,
                                const OverlapOptions &opt) {
  Require(opt.close_first >= 1 && opt.close_first <= opt.close_last &&
              opt.far_first >= 1 && opt.far_first <= opt.far_last,
          "OverlapHistograms: bad rank ranges");
  const std::size_t depth = std::max(opt.close_last, opt.far_last);
  Require(static_cast<std::size_t>(e.rows.rows()) >= depth + 1,
          "OverlapHistograms: need at least " + std::to_string(depth + 1) +
              " embedding rows for neighbor rank " + std::to_string(depth) + ", have " +
              std::to_string(e.rows.rows()));
  OverlapResult r;
  r.close = Histogram::Uniform(0.0, 1.0, opt.bins);
  r.far = Histogram::Uniform(0.0, 1.0, opt.bins);
  for (Label w = 0; w < static_cast<Label>(e.word_count()); ++w) {
    const std::string &word = e.vocab.label(w);
    const auto &pron = lexicon.Pronunciation(word);
    const NeighborList nn = Neighbors(e, w, depth);
    auto collect = [&](std::size_t first, std::size_t last, Histogram &h, std::vector<double> &out) {
      for (std::size_t rank = first; rank <= last; ++rank) {
        const Label other = nn[rank - 1].id;
        if (other == e.blank()) {
          ++r.skipped_blank;
          continue;
        }
        const double ov = PronunciationOverlap(pron, lexicon.Pronunciation(e.vocab.label(other)));
        h.Add(ov);
        out.push_back(ov);
      }
    };
    collect(opt.close_first, opt.close_last, r.close, r.close_values);
    collect(opt.far_first, opt.far_last, r.far, r.far_values);
  }
  r.mean_close = Mean(r.close_values);
  r.mean_far = Mean(r.far_values);
  return r;
}

double PermutationTestGreater(const std::vector<double> &a, const std::vector<double> &b,
                              std::size_t permutations, std::uint64_t seed) {
  Require(!a.empty() && !b.empty(), "PermutationTestGreater: empty sample");
  const double observed = Mean(a) - Mean(b);
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const double total = std::accumulate(pooled.begin(), pooled.end(), 0.0);
  const auto na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  Rng rng(seed);
  std::size_t extreme = 0;
  for (std::size_t i = 0; i < permutations; ++i) {
    rng.Shuffle(pooled);
    const double sum_a = std::accumulate(pooled.begin(), pooled.begin() + static_cast<std::ptrdiff_t>(a.size()), 0.0);
    const double stat = sum_a / na - (total - sum_a) / nb;
    // Small slack so that permutations reproducing the observed split in a
    // different summation order still count as ties.
    if (stat >= observed - 1e-12) ++extreme;
  }
  return (1.0 + static_cast<double>(extreme)) / (1.0 + static_cast<double>(permutations));
}

double BlankDistanceReport::Percentile(double p) const {
  Require(!pooled.empty(), "Percentile: no distances");
  std::vector<double> v(pooled);
  std::sort(v.begin(), v.end());
  const double pos = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

BlankDistanceReport BlankDistances(const EmbeddingMatrix &e, std::size_t k, std::size_t bins) {
  Require(k >= 1, "BlankDistances: k must be positive");
  Require(e.word_count() >= k + 1, "BlankDistances: need at least " + std::to_string(k + 1) +
                                       " words, have " + std::to_string(e.word_count()));
  BlankDistanceReport r;
  r.k = k;
  for (Label w = 0; w < static_cast<Label>(e.word_count()); ++w) {
    double sum = 0.0;
    for (const auto &n : Neighbors(e, w, k, NeighborScope::kWordsOnly)) {
      r.pooled.push_back(n.distance);
      sum += n.distance;
    }
    r.per_word_mean.push_back(sum / static_cast<double>(k));
  }
  double sum = 0.0;
  for (const auto &n : Neighbors(e, e.blank(), k, NeighborScope::kWordsOnly)) sum += n.distance;
  r.blank_mean = sum / static_cast<double>(k);

  const double top = std::max(*std::max_element(r.pooled.begin(), r.pooled.end()), r.blank_mean);
  r.histogram = Histogram::Uniform(0.0, top > 0.0 ? top : 1.0, bins);
  for (double d : r.pooled) r.histogram.Add(d);
  return r;
}

std::vector<double> Ranks(const std::vector<double> &v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t m = i; m <= j; ++m) ranks[idx[m]] = avg;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> SpearmanCorrelation(const std::vector<double> &x, const std::vector<double> &y) {
  Require(x.size() == y.size(), "SpearmanCorrelation: length mismatch", ErrorKind::kDimensionMismatch);
  if (x.size() < 2) return std::nullopt;
  const auto rx = Ranks(x), ry = Ranks(y);
  const double mx = Mean(rx), my = Mean(ry);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

FrequencyMarginTable FrequencyMargin(const EmbeddingMatrix &e,
                                     const std::vector<std::vector<std::string>> &transcripts) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto &t : transcripts)
    for (const auto &w : t) ++counts[w];
  FrequencyMarginTable table;
  std::vector<double> c, m;
  for (Label w = 0; w < static_cast<Label>(e.word_count()); ++w) {
    FrequencyMarginRow row;
    row.word = e.vocab.label(w);
    auto it = counts.find(row.word);
    row.count = it == counts.end() ? 0 : it->second;
    row.margin = Margin(e, w);
    c.push_back(static_cast<double>(row.count));
    m.push_back(row.margin);
    table.rows.push_back(std::move(row));
  }
  table.rank_correlation = SpearmanCorrelation(c, m);
  return table;
}

void WriteHistograms(std::ostream &os, const std::vector<std::string> &names,
                     const std::vector<const Histogram *> &hists) {
  Require(!hists.empty() && names.size() == hists.size(), "WriteHistograms: bad arguments");
  os << "bin_lo\tbin_hi";
  for (const auto &n : names) os << '\t' << n;
  os << '\n';
  for (std::size_t b = 0; b < hists[0]->counts.size(); ++b) {
    os << fmt::format("{}\t{}", hists[0]->edges[b], hists[0]->edges[b + 1]);
    for (const auto *h : hists) os << '\t' << h->counts[b];
    os << '\n';
  }
}

void WriteOverlapSummary(std::ostream &os, const OverlapResult &r, double p_value) {
  os << "statistic\tvalue\n";
  os << fmt::format("close_count\t{}\n", r.close_values.size());
  os << fmt::format("far_count\t{}\n", r.far_values.size());
  os << fmt::format("close_mean\t{}\n", r.mean_close);
  os << fmt::format("far_mean\t{}\n", r.mean_far);
  os << fmt::format("skipped_blank\t{}\n", r.skipped_blank);
  os << fmt::format("permutation_p\t{}\n", p_value);
}

void WriteBlankSummary(std::ostream &os, const BlankDistanceReport &r, const EmbeddingMatrix &e) {
  os << "label\tmean_distance_top" << r.k << '\n';
  for (std::size_t w = 0; w < r.per_word_mean.size(); ++w)
    os << fmt::format("{}\t{}\n", e.vocab.label(static_cast<Label>(w)), r.per_word_mean[w]);
  os << fmt::format("{}\t{}\n", kBlankName, r.blank_mean);
}

void WriteFrequencyMargin(std::ostream &os, const FrequencyMarginTable &t) {
  os << "word\tcount\tmargin\n";
  for (const auto &row : t.rows) os << fmt::format("{}\t{}\t{}\n", row.word, row.count, row.margin);
}

}  // namespace a2w
