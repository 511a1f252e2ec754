// tests/unit/analysis_test.cpp

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

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "a2w/analysis.hpp"
#include "a2w/error.hpp"
#include "oracles.hpp"

namespace a2w {
namespace {

std::vector<std::string> WordNames(int n) {
  std::vector<std::string> w;
  for (int i = 0; i < n; ++i) w.push_back("w" + std::to_string(i));
  return w;
}

// rows holds one row per word followed by the blank row.
EmbeddingMatrix Embedding(const Mat &rows) {
  return {rows, Vocabulary(WordNames(static_cast<int>(rows.rows()) - 1))};
}

Mat RandomRows(std::mt19937 &gen, int rows, int cols) {
  std::normal_distribution<double> n;
  Mat m(rows, cols);
  for (auto &x : Flat(m)) x = n(gen);
  return m;
}

TEST(Neighbors, HandGeometry) {
  Mat rows(4, 2);
  rows << 0, 0, 1, 0, 5, 0, 100, 100;
  const EmbeddingMatrix e = Embedding(rows);
  const NeighborList n = Neighbors(e, "w0", 2);
  ASSERT_EQ(n.size(), 2u);
  EXPECT_EQ(n[0].id, 1);
  EXPECT_DOUBLE_EQ(n[0].distance, 1.0);
  EXPECT_EQ(n[1].id, 2);
  EXPECT_DOUBLE_EQ(n[1].distance, 5.0);
  EXPECT_DOUBLE_EQ(Margin(e, "w0"), 1.0);
  EXPECT_DOUBLE_EQ(Margin(e, "w0"), Neighbors(e, "w0", 1)[0].distance);
  EXPECT_EQ(Neighbors(e, kBlankName, 1)[0].id, 2);
}

TEST(Neighbors, DuplicateRowsComeFirstWithZeroMargin) {
  Mat rows(4, 2);
  rows << 3, 3, 0, 0, 3, 3, 9, 9;
  const EmbeddingMatrix e = Embedding(rows);
  EXPECT_EQ(Neighbors(e, "w0", 1)[0].id, 2);
  EXPECT_EQ(Margin(e, "w0"), 0.0);
  EXPECT_EQ(Margin(e, "w2"), 0.0);
}

TEST(Neighbors, TiesBrokenByLowerId) {
  Mat rows(5, 1);
  rows << 0, 1, -1, 1, 50;
  const NeighborList n = Neighbors(Embedding(rows), "w0", 3);
  EXPECT_EQ(n[0].id, 1);
  EXPECT_EQ(n[1].id, 2);
  EXPECT_EQ(n[2].id, 3);
}

TEST(Neighbors, WordsOnlyScopeSkipsBlank) {
  Mat rows(3, 1);
  rows << 0, 10, 1;
  const EmbeddingMatrix e = Embedding(rows);
  EXPECT_EQ(Neighbors(e, "w0", 1)[0].id, e.blank());
  EXPECT_EQ(Neighbors(e, "w0", 1, NeighborScope::kWordsOnly)[0].id, 1);
}

TEST(Neighbors, Errors) {
  std::mt19937 gen(1);
  const EmbeddingMatrix e = Embedding(RandomRows(gen, 4, 2));
  try {
    Neighbors(e, "nope", 1);
    FAIL();
  } catch (const Error &err) {
    EXPECT_EQ(err.kind(), ErrorKind::kUnknownLabel);
  }
  EXPECT_THROW(Neighbors(e, "w0", 4), Error);
  EXPECT_NO_THROW(Neighbors(e, "w0", 3));
}

TEST(Neighbors, AgreesWithFullScan) {
  std::mt19937 gen(2);
  const EmbeddingMatrix small = Embedding(RandomRows(gen, 300, 16));
  for (int q = 0; q < 300; ++q) {
    const auto expected = oracle::ScanNeighbors(small.rows, q, 10);
    const auto got = Neighbors(small, q, 10);
    for (std::size_t i = 0; i < 10; ++i) {
      EXPECT_EQ(got[i].id, expected[i].first);
      EXPECT_NEAR(got[i].distance, expected[i].second, 1e-12);
    }
  }
  const EmbeddingMatrix large = Embedding(RandomRows(gen, 1000, 64));
  for (int q = 0; q < 1000; q += 37) {
    const auto expected = oracle::ScanNeighbors(large.rows, q, 999);
    const auto got = Neighbors(large, q, 999);
    for (std::size_t i = 0; i < 999; ++i) ASSERT_EQ(got[i].id, expected[i].first);
  }
}

TEST(Margin, PositiveWhenRowsDistinct) {
  std::mt19937 gen(3);
  const EmbeddingMatrix e = Embedding(RandomRows(gen, 60, 5));
  for (Label w = 0; w < 59; ++w) EXPECT_GT(Margin(e, w), 0.0);
}

TEST(PronunciationOverlap, Definition) {
  EXPECT_DOUBLE_EQ(PronunciationOverlap({"K", "AE", "T"}, {"B", "AE", "T"}), 2.0 / 3.0);
  EXPECT_EQ(PronunciationOverlap({"K", "AE", "T"}, {"K", "AE", "T"}), 1.0);
  EXPECT_EQ(PronunciationOverlap({"K", "AE"}, {"B", "IY"}), 0.0);
  // Multiset: the repeated A counts once against a single A.
  EXPECT_EQ(PronunciationOverlap({"A", "A", "B"}, {"A", "C"}), 0.5);
  EXPECT_EQ(PronunciationOverlap({"A", "A", "B"}, {"A", "A", "C"}), 2.0 / 3.0);
  // Shorter word's length is the denominator.
  EXPECT_EQ(PronunciationOverlap({"AE", "T"}, {"K", "AE", "T", "S"}), 1.0);
  EXPECT_THROW(PronunciationOverlap(std::vector<std::string>{}, {"A"}), Error);

  Lexicon lex;
  lex.Add("CAT", {"K", "AE", "T"});
  lex.Add("BAT", {"B", "AE", "T"});
  EXPECT_DOUBLE_EQ(PronunciationOverlap("CAT", "BAT", lex), 2.0 / 3.0);
  EXPECT_THROW(PronunciationOverlap("CAT", "DOG", lex), Error);
}

TEST(PronunciationOverlap, SymmetricAndBounded) {
  std::mt19937 gen(4);
  std::uniform_int_distribution<int> len(1, 6), ph(0, 4);
  auto random_pron = [&] {
    std::vector<std::string> p(static_cast<std::size_t>(len(gen)));
    for (auto &s : p) s = "P" + std::to_string(ph(gen));
    return p;
  };
  for (int trial = 0; trial < 1000; ++trial) {
    const auto a = random_pron(), b = random_pron();
    const double ab = PronunciationOverlap(a, b);
    EXPECT_EQ(ab, PronunciationOverlap(b, a));
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
    EXPECT_EQ(PronunciationOverlap(a, a), 1.0);
  }
}

TEST(Histogram, EdgesAndClamping) {
  Histogram h = Histogram::Uniform(0.0, 1.0, 4);
  EXPECT_EQ(h.edges, (std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0}));
  for (double v : {0.0, 0.25, 0.3, 1.0, 1.7, -0.2}) h.Add(v);
  EXPECT_EQ(h.counts, (std::vector<std::size_t>{2, 2, 0, 2}));
  EXPECT_EQ(h.total(), 6u);
  EXPECT_THROW(Histogram::Uniform(1.0, 1.0, 3), Error);
  EXPECT_THROW(Histogram::Uniform(0.0, 1.0, 0), Error);
}

Lexicon RandomLexicon(std::mt19937 &gen, const std::vector<std::string> &words, int phones) {
  std::uniform_int_distribution<int> len(2, 6), ph(0, phones - 1);
  Lexicon lex;
  for (const auto &w : words) {
    std::vector<std::string> p(static_cast<std::size_t>(len(gen)));
    for (auto &s : p) s = "P" + std::to_string(ph(gen));
    lex.Add(w, p);
  }
  return lex;
}

TEST(OverlapHistograms, IdenticalPronunciationsPutCloseMassAtOne) {
  std::mt19937 gen(5);
  const EmbeddingMatrix e = Embedding(RandomRows(gen, 51, 4));
  Lexicon lex;
  for (const auto &w : e.vocab.labels()) lex.Add(w, {"A", "B"});
  const OverlapResult r = OverlapHistograms(e, lex);
  EXPECT_EQ(r.close.counts.back(), r.close.total());
  EXPECT_EQ(r.close.total() + r.far.total() + r.skipped_blank, 50u * 6u);
  EXPECT_EQ(r.mean_close, 1.0);
}

TEST(OverlapHistograms, NeedsEnoughRows) {
  std::mt19937 gen(6);
  const EmbeddingMatrix e = Embedding(RandomRows(gen, 50, 4));
  const Lexicon lex = RandomLexicon(gen, e.vocab.labels(), 8);
  EXPECT_THROW(OverlapHistograms(e, lex), Error);
  OverlapOptions near;
  near.far_first = 10;
  near.far_last = 12;
  EXPECT_NO_THROW(OverlapHistograms(e, lex, near));
}

TEST(OverlapHistograms, RandomEmbeddingsShowNoSeparation) {
  std::mt19937 gen(7);
  int significant = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const EmbeddingMatrix e = Embedding(RandomRows(gen, 61, 8));
    const Lexicon lex = RandomLexicon(gen, e.vocab.labels(), 10);
    const OverlapResult r = OverlapHistograms(e, lex);
    const double p = PermutationTestGreater(r.close_values, r.far_values, 2000, 100 + static_cast<std::uint64_t>(trial));
    significant += p < 0.05;
  }
  EXPECT_LE(significant, 2);
}

TEST(PermutationTestGreater, ClearAndNullCases) {
  const std::vector<double> high(30, 1.0), low(30, 0.0);
  EXPECT_NEAR(PermutationTestGreater(high, low, 999, 1), 1.0 / 1000.0, 1e-12);
  const std::vector<double> same(20, 0.5);
  EXPECT_EQ(PermutationTestGreater(same, same, 500, 1), 1.0);
  EXPECT_EQ(PermutationTestGreater(high, low, 200, 3), PermutationTestGreater(high, low, 200, 3));
  EXPECT_THROW(PermutationTestGreater({}, low, 10, 1), Error);
}

TEST(BlankDistances, FarBlankExceedsWordSpread) {
  std::mt19937 gen(8);
  Mat rows = 0.1 * RandomRows(gen, 31, 6);
  rows.row(30).setConstant(50.0);
  const BlankDistanceReport r = BlankDistances(Embedding(rows));
  EXPECT_EQ(r.pooled.size(), 30u * 25u);
  EXPECT_EQ(r.per_word_mean.size(), 30u);
  EXPECT_GT(r.blank_mean, r.Percentile(99.0));
  EXPECT_GT(r.blank_mean, r.Median());
  EXPECT_EQ(r.histogram.total(), r.pooled.size());
}

TEST(BlankDistances, IdenticalRowsGiveZeros) {
  const BlankDistanceReport r = BlankDistances(Embedding(Mat::Ones(27, 3)));
  for (double d : r.pooled) EXPECT_EQ(d, 0.0);
  EXPECT_EQ(r.blank_mean, 0.0);
  EXPECT_EQ(r.Median(), 0.0);
}

TEST(BlankDistances, NeedsMoreWordsThanK) {
  EXPECT_THROW(BlankDistances(Embedding(Mat::Ones(26, 2))), Error);
  EXPECT_NO_THROW(BlankDistances(Embedding(Mat::Ones(27, 2))));
}

TEST(BlankDistanceReport, PercentileInterpolates) {
  BlankDistanceReport r;
  r.pooled = {4.0, 1.0, 3.0, 2.0};
  EXPECT_DOUBLE_EQ(r.Median(), 2.5);
  EXPECT_DOUBLE_EQ(r.Percentile(0.0), 1.0);
  EXPECT_DOUBLE_EQ(r.Percentile(100.0), 4.0);
}

TEST(Ranks, TiesShareAverage) {
  EXPECT_EQ(Ranks({10.0, 30.0, 20.0}), (std::vector<double>{1.0, 3.0, 2.0}));
  EXPECT_EQ(Ranks({5.0, 5.0, 1.0, 5.0}), (std::vector<double>{3.0, 3.0, 1.0, 3.0}));
}

TEST(SpearmanCorrelation, KnownValues) {
  EXPECT_DOUBLE_EQ(*SpearmanCorrelation({1, 2, 3, 4}, {10, 20, 30, 40}), 1.0);
  EXPECT_DOUBLE_EQ(*SpearmanCorrelation({1, 2, 3, 4}, {4, 3, 2, 1}), -1.0);
  // d = (0, 0, 1, -1): 1 - 6 * 2 / (4 * 15) = 0.8 without ties.
  EXPECT_NEAR(*SpearmanCorrelation({1, 2, 3, 4}, {1, 2, 4, 3}), 0.8, 1e-12);
  EXPECT_FALSE(SpearmanCorrelation({1, 1, 1}, {1, 2, 3}).has_value());
  EXPECT_FALSE(SpearmanCorrelation({1}, {2}).has_value());
}

TEST(FrequencyMargin, UniformCountsAreFlagged) {
  std::mt19937 gen(9);
  const EmbeddingMatrix e = Embedding(RandomRows(gen, 5, 3));
  const FrequencyMarginTable t = FrequencyMargin(e, {{"w0", "w1"}, {"w2", "w3"}});
  ASSERT_EQ(t.rows.size(), 4u);
  for (const auto &row : t.rows) EXPECT_EQ(row.count, 1u);
  EXPECT_FALSE(t.rank_correlation.has_value());
}

TEST(FrequencyMargin, MarginsFollowingCountsCorrelatePerfectly) {
  // Words on a line at growing gaps, so margins increase with the index;
  // counts increase with the index too. The blank sits far away.
  Mat rows(5, 1);
  rows << 0, 2, 5, 9, 1000;
  const EmbeddingMatrix e = Embedding(rows);
  // Margins: w0 2, w1 2, w2 3, w3 4 (ties for w0/w1), counts 1, 1, 2, 3.
  const FrequencyMarginTable t = FrequencyMargin(e, {{"w0", "w1", "w2", "w3"}, {"w2", "w3", "w3"}});
  EXPECT_EQ(t.rows[3].count, 3u);
  EXPECT_DOUBLE_EQ(t.rows[2].margin, 3.0);
  ASSERT_TRUE(t.rank_correlation.has_value());
  EXPECT_NEAR(*t.rank_correlation, 1.0, 1e-12);
}

TEST(Writers, OneLineHeaders) {
  Histogram a = Histogram::Uniform(0.0, 1.0, 2), b = Histogram::Uniform(0.0, 1.0, 2);
  a.Add(0.1);
  b.Add(0.9);
  std::ostringstream os;
  WriteHistograms(os, {"close", "far"}, {&a, &b});
  EXPECT_EQ(os.str(), "bin_lo\tbin_hi\tclose\tfar\n0\t0.5\t1\t0\n0.5\t1\t0\t1\n");

  FrequencyMarginTable t;
  t.rows.push_back({"w0", 3, 0.5});
  std::ostringstream fm;
  WriteFrequencyMargin(fm, t);
  EXPECT_EQ(fm.str(), "word\tcount\tmargin\nw0\t3\t0.5\n");
}

}  // namespace
}  // namespace a2w
