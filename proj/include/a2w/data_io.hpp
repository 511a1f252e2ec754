// a2w/data_io.hpp

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

#ifndef A2W_DATA_IO_HPP_
#define A2W_DATA_IO_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "a2w/ctc.hpp"
#include "a2w/numerics.hpp"
#include "a2w/rng.hpp"

namespace a2w {

/// Frame label used for inter-word silence in alignments.
inline const std::string kSilence = "SIL";

struct Utterance {
  std::string id;
  Mat features;                        // T x d; every value is exactly a float
  std::vector<std::string> words;      // transcript
  std::vector<std::string> alignment;  // T frame labels (word or SIL); empty if absent

  bool operator==(const Utterance &) const = default;
};

using Corpus = std::vector<Utterance>;

/// Collapses a frame alignment: merge runs, drop silence.
std::vector<std::string> CollapseAlignment(const std::vector<std::string> &frames);

/// Word -> pronunciations. The first pronunciation added for a word is its
/// canonical one.
class Lexicon {
 public:
  void Add(const std::string &word, std::vector<std::string> phones);

  bool Contains(const std::string &word) const { return prons_.count(word) > 0; }
  /// Canonical pronunciation; throws kUnknownLabel naming the word.
  const std::vector<std::string> &Pronunciation(const std::string &word) const;
  const std::vector<std::vector<std::string>> &Pronunciations(const std::string &word) const;

  /// Words in insertion order.
  const std::vector<std::string> &words() const { return words_; }
  /// Phoneme inventory in order of first appearance.
  const std::vector<std::string> &phones() const { return phones_; }
  std::size_t size() const { return words_.size(); }

  bool operator==(const Lexicon &o) const { return words_ == o.words_ && prons_ == o.prons_; }

 private:
  std::vector<std::string> words_;
  std::vector<std::string> phones_;
  std::map<std::string, std::vector<std::vector<std::string>>> prons_;
};

/// Replaces every word by its canonical pronunciation, in order. Throws
/// kUnknownLabel naming the first out-of-lexicon word.
std::vector<std::string> ConvertToPhonemes(const std::vector<std::string> &words,
                                           const Lexicon &lexicon);
Corpus ConvertTranscriptsToPhonemes(Corpus corpus, const Lexicon &lexicon);

/// Synthetic corpus parameters. Durations are in frames at 10 ms per frame;
/// the phoneme duration defaults are the measured 81.6 ms mean and 46.7 ms
/// standard deviation.
struct SynthConfig {
  std::uint64_t seed = 1;
  int vocab_size = 50;
  int phoneme_count = 12;
  int feature_dim = 16;
  double phone_duration_mean = 8.16;
  double phone_duration_std = 4.67;
  int pron_min = 2;
  int pron_max = 6;
  double noise = 0.5;
  int words_min = 5;
  int words_max = 10;
  int train_size = 540;
  int dev_size = 60;
  int test_size = 60;
  double silence_prob = 0.2;
  /// Word unigram distribution p(rank r) ~ 1 / (r + 1)^zipf; 0 is uniform.
  double zipf = 1.0;

  void Validate() const;
};

struct SyntheticCorpus {
  Corpus train, dev, test;
  Lexicon lexicon;
  std::vector<std::string> words;   // vocabulary, rank order
  std::vector<std::string> phones;  // inventory
};

/// Deterministic for a given config. Each phoneme has a fixed Gaussian
/// prototype vector; silence is the zero vector. A word is realized by
/// repeating each phoneme's prototype for a sampled duration, then adding
/// i.i.d. Gaussian noise to every frame. Utterances start and end with
/// silence and have silence between words with probability silence_prob.
SyntheticCorpus GenerateSynthetic(const SynthConfig &cfg);

/// Location of the underlying normal such that durations round(N(mu, std))
/// resampled until >= 1 have the requested mean.
double DurationLocation(double mean, double stddev);

/// One duration draw, in frames (>= 1).
int SampleDuration(Rng &rng, double location, double stddev);

// Feature files: "A2WF" magic, u32 version, u32 T, u32 d, then T*d float32,
// row-major, all little-endian.
inline constexpr std::uint32_t kFeatureFormatVersion = 1;

void WriteFeatures(std::ostream &os, const Mat &features);
Mat ReadFeatures(std::istream &is, const std::string &what = "features");
void WriteFeatures(const std::string &path, const Mat &features);
Mat ReadFeatures(const std::string &path);

/// Writes <dir>/corpus.tsv (id, feature path relative to dir, transcript),
/// <dir>/feats/<id>.feat, and <dir>/align.tsv when any utterance carries an
/// alignment.
void SaveCorpus(const std::string &dir, const Corpus &corpus);

/// Loads <dir>/corpus.tsv, every referenced feature file, and align.tsv if
/// present. When vocab is non-null every transcript word must be in it.
Corpus LoadCorpus(const std::string &dir, const Vocabulary *vocab = nullptr);

/// Lexicon file: word TAB space-separated phonemes, one pronunciation per
/// line.
void SaveLexicon(std::ostream &os, const Lexicon &lexicon);
Lexicon LoadLexicon(std::istream &is, const std::string &what = "lexicon");
void SaveLexicon(const std::string &path, const Lexicon &lexicon);
Lexicon LoadLexicon(const std::string &path);

/// One label per line.
void SaveLabelList(const std::string &path, const std::vector<std::string> &labels);
std::vector<std::string> LoadLabelList(const std::string &path);

/// id TAB space-separated labels. Used for alignments, references and
/// hypotheses.
void WriteLabelTable(std::ostream &os,
                     const std::vector<std::pair<std::string, std::vector<std::string>>> &rows);
std::vector<std::pair<std::string, std::vector<std::string>>> ReadLabelTable(
    std::istream &is, const std::string &what);
std::vector<std::pair<std::string, std::vector<std::string>>> ReadLabelTable(
    const std::string &path);

/// Seeded random partition. The dev side gets n - ceil(fraction * n)
/// utterances (rounding goes to train); both sides keep corpus order.
std::pair<Corpus, Corpus> TrainDevSplit(const Corpus &corpus, double fraction, std::uint64_t seed);

/// Deterministic seeded subset of round(fraction * n) utterances (at least
/// one), in corpus order.
Corpus SubsetFraction(const Corpus &corpus, double fraction, std::uint64_t seed);

std::vector<std::string> SplitWords(const std::string &s);
std::string JoinWords(const std::vector<std::string> &words);

}  // namespace a2w

#endif  // A2W_DATA_IO_HPP_
