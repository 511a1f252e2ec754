// src/data_io.cpp

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

#include "a2w/data_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "a2w/binary_io.hpp"
#include "a2w/error.hpp"

namespace fs = std::filesystem;

namespace a2w {

std::vector<std::string> SplitWords(const std::string &s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

std::string JoinWords(const std::vector<std::string> &words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

std::vector<std::string> CollapseAlignment(const std::vector<std::string> &frames) {
  std::vector<std::string> out;
  const std::string *prev = nullptr;
  for (const auto &f : frames) {
    if ((prev == nullptr || f != *prev) && f != kSilence) out.push_back(f);
    prev = &f;
  }
  return out;
}

// Lexicon --------------------------------------------------------------------

void Lexicon::Add(const std::string &word, std::vector<std::string> phones) {
  Require(!word.empty(), "Lexicon: empty word");
  Require(!phones.empty(), "Lexicon: empty pronunciation for '" + word + "'");
  for (const auto &p : phones)
    if (std::find(phones_.begin(), phones_.end(), p) == phones_.end()) phones_.push_back(p);
  auto &entry = prons_[word];
  if (entry.empty()) words_.push_back(word);
  entry.push_back(std::move(phones));
}

const std::vector<std::vector<std::string>> &Lexicon::Pronunciations(const std::string &word) const {
  auto it = prons_.find(word);
  if (it == prons_.end()) Fail(ErrorKind::kUnknownLabel, "word '" + word + "' is not in the lexicon");
  return it->second;
}

const std::vector<std::string> &Lexicon::Pronunciation(const std::string &word) const {
  return Pronunciations(word).front();
}

std::vector<std::string> ConvertToPhonemes(const std::vector<std::string> &words,
                                           const Lexicon &lexicon) {
  std::vector<std::string> out;
  for (const auto &w : words) {
    const auto &pron = lexicon.Pronunciation(w);
    out.insert(out.end(), pron.begin(), pron.end());
  }
  return out;
}

Corpus ConvertTranscriptsToPhonemes(Corpus corpus, const Lexicon &lexicon) {
  for (auto &u : corpus) {
    u.words = ConvertToPhonemes(u.words, lexicon);
    u.alignment.clear();  // word-level frame labels no longer apply
  }
  return corpus;
}

// Synthetic corpus -----------------------------------------------------------

void SynthConfig::Validate() const {
  Require(vocab_size >= 1, "synth: vocab_size must be >= 1");
  Require(phoneme_count >= 1, "synth: phoneme_count must be >= 1");
  Require(feature_dim >= 1, "synth: feature_dim must be >= 1");
  Require(phone_duration_mean >= 1.0, "synth: phone_duration_mean must be >= 1 frame");
  Require(phone_duration_std >= 0.0, "synth: phone_duration_std must be >= 0");
  Require(pron_min >= 1, "synth: pronunciations must have at least one phoneme");
  Require(pron_max >= pron_min, "synth: pron_max < pron_min");
  Require(noise >= 0.0, "synth: noise must be >= 0");
  Require(words_min >= 1 && words_max >= words_min, "synth: bad utterance length range");
  Require(train_size >= 1 && dev_size >= 1 && test_size >= 1, "synth: split sizes must be >= 1");
  Require(silence_prob >= 0.0 && silence_prob <= 1.0, "synth: silence_prob outside [0, 1]");
  Require(zipf >= 0.0, "synth: zipf must be >= 0");
  // Distinct pronunciations without immediate phoneme repeats.
  double distinct = 0.0;
  for (int len = pron_min; len <= pron_max; ++len)
    distinct += phoneme_count * std::pow(std::max(phoneme_count - 1, 0), len - 1);
  Require(distinct >= vocab_size,
          "synth: not enough distinct pronunciations for " + std::to_string(vocab_size) + " words");
}

namespace {

double NormalCdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double TruncatedRoundedMean(double mu, double sigma) {
  double num = 0.0, den = 0.0;
  const int hi = static_cast<int>(std::ceil(std::max(mu, 1.0) + 12.0 * sigma)) + 2;
  for (int k = 1; k <= hi; ++k) {
    const double p = NormalCdf((k + 0.5 - mu) / sigma) - NormalCdf((k - 0.5 - mu) / sigma);
    num += k * p;
    den += p;
  }
  return den > 0.0 ? num / den : 1.0;
}

}  // namespace

double DurationLocation(double mean, double stddev) {
  Require(mean >= 1.0, "DurationLocation: mean must be >= 1");
  if (stddev <= 0.0) return mean;
  double lo = mean - 10.0 * stddev, hi = mean;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (TruncatedRoundedMean(mid, stddev) < mean)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

int SampleDuration(Rng &rng, double location, double stddev) {
  for (;;) {
    const long d = std::lround(rng.Normal(location, stddev));
    if (d >= 1) return static_cast<int>(d);
  }
}

SyntheticCorpus GenerateSynthetic(const SynthConfig &cfg) {
  cfg.Validate();
  Rng rng(cfg.seed);
  SyntheticCorpus out;

  for (int p = 0; p < cfg.phoneme_count; ++p) out.phones.push_back(fmt::format("P{:02d}", p));
  std::vector<Vec> prototypes;
  for (int p = 0; p < cfg.phoneme_count; ++p) {
    Vec v(cfg.feature_dim);
    for (int j = 0; j < cfg.feature_dim; ++j) v(j) = rng.Normal();
    prototypes.push_back(std::move(v));
  }

  // Pronunciations: uniform length, no phoneme repeated back to back, all
  // distinct.
  std::set<std::vector<int>> seen;
  std::vector<std::vector<int>> prons;
  for (int w = 0; w < cfg.vocab_size; ++w) {
    std::vector<int> pron;
    do {
      pron.clear();
      const int len =
          cfg.pron_min + static_cast<int>(rng.Below(static_cast<std::uint64_t>(cfg.pron_max - cfg.pron_min + 1)));
      while (static_cast<int>(pron.size()) < len) {
        const int p = static_cast<int>(rng.Below(static_cast<std::uint64_t>(cfg.phoneme_count)));
        if (!pron.empty() && pron.back() == p && cfg.phoneme_count > 1) continue;
        pron.push_back(p);
      }
    } while (!seen.insert(pron).second);
    prons.push_back(pron);
    out.words.push_back(fmt::format("W{:02d}", w));
    std::vector<std::string> names;
    for (int p : pron) names.push_back(out.phones[static_cast<std::size_t>(p)]);
    out.lexicon.Add(out.words.back(), names);
  }

  std::vector<double> cdf;
  double total = 0.0;
  for (int w = 0; w < cfg.vocab_size; ++w) {
    total += 1.0 / std::pow(w + 1.0, cfg.zipf);
    cdf.push_back(total);
  }
  for (double &c : cdf) c /= total;
  auto sample_word = [&]() {
    const double u = rng.Uniform01();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return static_cast<int>(std::min<std::ptrdiff_t>(it - cdf.begin(), cfg.vocab_size - 1));
  };

  const double location = DurationLocation(cfg.phone_duration_mean, cfg.phone_duration_std);
  const Vec silence = Vec::Zero(cfg.feature_dim);

  auto make_utterance = [&](const std::string &id) {
    Utterance u;
    u.id = id;
    std::vector<const Vec *> frames;
    auto emit = [&](const Vec &proto, const std::string &label) {
      const int d = SampleDuration(rng, location, cfg.phone_duration_std);
      for (int i = 0; i < d; ++i) {
        frames.push_back(&proto);
        u.alignment.push_back(label);
      }
    };
    const int n = cfg.words_min +
                  static_cast<int>(rng.Below(static_cast<std::uint64_t>(cfg.words_max - cfg.words_min + 1)));
    emit(silence, kSilence);
    for (int k = 0; k < n; ++k) {
      const int w = sample_word();
      const std::string &word = out.words[static_cast<std::size_t>(w)];
      u.words.push_back(word);
      for (int p : prons[static_cast<std::size_t>(w)]) emit(prototypes[static_cast<std::size_t>(p)], word);
      if (k + 1 < n && rng.Uniform01() < cfg.silence_prob) emit(silence, kSilence);
    }
    emit(silence, kSilence);

    u.features.resize(static_cast<Eigen::Index>(frames.size()), cfg.feature_dim);
    for (std::size_t t = 0; t < frames.size(); ++t)
      for (int j = 0; j < cfg.feature_dim; ++j) {
        const double v = (*frames[t])(j) + cfg.noise * rng.Normal();
        u.features(static_cast<Eigen::Index>(t), j) = static_cast<double>(static_cast<float>(v));
      }
    return u;
  };

  for (int i = 0; i < cfg.train_size; ++i) out.train.push_back(make_utterance(fmt::format("train_{:05d}", i)));
  for (int i = 0; i < cfg.dev_size; ++i) out.dev.push_back(make_utterance(fmt::format("dev_{:05d}", i)));
  for (int i = 0; i < cfg.test_size; ++i) out.test.push_back(make_utterance(fmt::format("test_{:05d}", i)));
  return out;
}

// Feature files --------------------------------------------------------------

namespace {
constexpr char kFeatureMagic[4] = {'A', '2', 'W', 'F'};
}

void WriteFeatures(std::ostream &os, const Mat &features) {
  os.write(kFeatureMagic, 4);
  binary::WriteU32(os, kFeatureFormatVersion);
  binary::WriteU32(os, static_cast<std::uint32_t>(features.rows()));
  binary::WriteU32(os, static_cast<std::uint32_t>(features.cols()));
  for (Eigen::Index t = 0; t < features.rows(); ++t)
    for (Eigen::Index j = 0; j < features.cols(); ++j)
      binary::WriteF32(os, static_cast<float>(features(t, j)));
  if (!os) Fail(ErrorKind::kIo, "WriteFeatures: write failed");
}

Mat ReadFeatures(std::istream &is, const std::string &what) {
  binary::Reader in(is, what);
  char magic[4];
  in.ReadBytes(magic, 4);
  if (!std::equal(magic, magic + 4, kFeatureMagic)) in.Malformed("bad magic", 0);
  if (in.U32() != kFeatureFormatVersion) in.Malformed("unsupported version", 4);
  const std::uint32_t frames = in.U32();
  const std::uint32_t dim = in.U32();
  if (dim == 0 && frames > 0) in.Malformed("zero feature dimension", 12);
  Mat m(frames, dim);
  for (Eigen::Index t = 0; t < m.rows(); ++t)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(t, j) = static_cast<double>(in.F32());
  return m;
}

void WriteFeatures(const std::string &path, const Mat &features) {
  std::ofstream os(path, std::ios::binary);
  if (!os) Fail(ErrorKind::kIo, "cannot open '" + path + "' for writing");
  WriteFeatures(os, features);
}

Mat ReadFeatures(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Fail(ErrorKind::kIo, "cannot open feature file '" + path + "'");
  return ReadFeatures(is, path);
}

// Text tables ----------------------------------------------------------------

namespace {

std::vector<std::string> SplitTabs(const std::string &line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

std::string StripCr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

[[noreturn]] void BadLine(ErrorKind kind, const std::string &what, std::size_t line,
                          const std::string &msg) {
  throw FormatError(kind, what + ":" + std::to_string(line) + ": " + msg, line);
}

std::ofstream OpenOut(const std::string &path) {
  std::ofstream os(path);
  if (!os) Fail(ErrorKind::kIo, "cannot open '" + path + "' for writing");
  return os;
}

std::ifstream OpenIn(const std::string &path) {
  std::ifstream is(path);
  if (!is) Fail(ErrorKind::kIo, "cannot open '" + path + "'");
  return is;
}

}  // namespace

void WriteLabelTable(std::ostream &os,
                     const std::vector<std::pair<std::string, std::vector<std::string>>> &rows) {
  for (const auto &[id, labels] : rows) os << id << '\t' << JoinWords(labels) << '\n';
}

std::vector<std::pair<std::string, std::vector<std::string>>> ReadLabelTable(
    std::istream &is, const std::string &what) {
  std::vector<std::pair<std::string, std::vector<std::string>>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = StripCr(line);
    if (line.empty()) continue;
    std::size_t sep = line.find('\t');
    if (sep == std::string::npos) sep = line.find(' ');
    std::string id = line.substr(0, sep);
    if (id.empty()) BadLine(ErrorKind::kMalformedHeader, what, lineno, "missing utterance id");
    rows.emplace_back(std::move(id),
                      sep == std::string::npos ? std::vector<std::string>{}
                                               : SplitWords(line.substr(sep + 1)));
  }
  return rows;
}

std::vector<std::pair<std::string, std::vector<std::string>>> ReadLabelTable(
    const std::string &path) {
  auto is = OpenIn(path);
  return ReadLabelTable(is, path);
}

void SaveLabelList(const std::string &path, const std::vector<std::string> &labels) {
  auto os = OpenOut(path);
  for (const auto &l : labels) os << l << '\n';
}

std::vector<std::string> LoadLabelList(const std::string &path) {
  auto is = OpenIn(path);
  std::vector<std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = StripCr(line);
    if (line.empty()) continue;
    if (line.find_first_of(" \t") != std::string::npos)
      BadLine(ErrorKind::kMalformedHeader, path, lineno, "labels may not contain whitespace");
    out.push_back(line);
  }
  return out;
}

void SaveLexicon(std::ostream &os, const Lexicon &lexicon) {
  for (const auto &w : lexicon.words())
    for (const auto &pron : lexicon.Pronunciations(w)) os << w << '\t' << JoinWords(pron) << '\n';
}

Lexicon LoadLexicon(std::istream &is, const std::string &what) {
  Lexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = StripCr(line);
    if (line.empty()) continue;
    const auto fields = SplitTabs(line);
    if (fields.size() != 2)
      BadLine(ErrorKind::kMalformedHeader, what, lineno, "expected 'word<TAB>phonemes'");
    auto phones = SplitWords(fields[1]);
    if (fields[0].empty() || phones.empty())
      BadLine(ErrorKind::kMalformedHeader, what, lineno, "empty word or pronunciation");
    lex.Add(fields[0], std::move(phones));
  }
  return lex;
}

void SaveLexicon(const std::string &path, const Lexicon &lexicon) {
  auto os = OpenOut(path);
  SaveLexicon(os, lexicon);
}

Lexicon LoadLexicon(const std::string &path) {
  auto is = OpenIn(path);
  return LoadLexicon(is, path);
}

// Corpus directories ---------------------------------------------------------

void SaveCorpus(const std::string &dir, const Corpus &corpus) {
  fs::create_directories(fs::path(dir) / "feats");
  auto manifest = OpenOut((fs::path(dir) / "corpus.tsv").string());
  bool any_alignment = false;
  for (const auto &u : corpus) {
    Require(!u.id.empty() && u.id.find_first_of(" \t/") == std::string::npos,
            "SaveCorpus: bad utterance id '" + u.id + "'");
    const std::string rel = "feats/" + u.id + ".feat";
    WriteFeatures((fs::path(dir) / rel).string(), u.features);
    manifest << u.id << '\t' << rel << '\t' << JoinWords(u.words) << '\n';
    any_alignment = any_alignment || !u.alignment.empty();
  }
  if (any_alignment) {
    auto align = OpenOut((fs::path(dir) / "align.tsv").string());
    for (const auto &u : corpus)
      if (!u.alignment.empty()) align << u.id << '\t' << JoinWords(u.alignment) << '\n';
  }
}

Corpus LoadCorpus(const std::string &dir, const Vocabulary *vocab) {
  const std::string manifest_path = (fs::path(dir) / "corpus.tsv").string();
  auto is = OpenIn(manifest_path);
  Corpus corpus;
  std::unordered_map<std::string, std::size_t> index;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = StripCr(line);
    if (line.empty()) continue;
    const auto fields = SplitTabs(line);
    if (fields.size() != 3)
      BadLine(ErrorKind::kMalformedHeader, manifest_path, lineno,
              "expected 3 tab-separated fields, got " + std::to_string(fields.size()));
    Utterance u;
    u.id = fields[0];
    if (u.id.empty()) BadLine(ErrorKind::kMalformedHeader, manifest_path, lineno, "empty id");
    if (!index.emplace(u.id, corpus.size()).second)
      BadLine(ErrorKind::kMalformedHeader, manifest_path, lineno, "duplicate id '" + u.id + "'");
    u.words = SplitWords(fields[2]);
    if (vocab)
      for (const auto &w : u.words)
        if (!vocab->find(w))
          BadLine(ErrorKind::kUnknownLabel, manifest_path, lineno,
                  "transcript of '" + u.id + "' uses word '" + w + "' absent from the vocabulary");
    const fs::path feat = fs::path(fields[1]).is_absolute() ? fs::path(fields[1])
                                                            : fs::path(dir) / fields[1];
    u.features = ReadFeatures(feat.string());
    corpus.push_back(std::move(u));
  }

  const fs::path align_path = fs::path(dir) / "align.tsv";
  if (fs::exists(align_path)) {
    auto ais = OpenIn(align_path.string());
    std::size_t row = 0;
    for (auto &[id, labels] : ReadLabelTable(ais, align_path.string())) {
      ++row;
      auto it = index.find(id);
      if (it == index.end())
        BadLine(ErrorKind::kUnknownLabel, align_path.string(), row, "unknown utterance '" + id + "'");
      Utterance &u = corpus[it->second];
      if (static_cast<Eigen::Index>(labels.size()) != u.features.rows())
        BadLine(ErrorKind::kMalformedHeader, align_path.string(), row,
                "alignment of '" + id + "' has " + std::to_string(labels.size()) +
                    " labels for " + std::to_string(u.features.rows()) + " frames");
      if (vocab)
        for (const auto &l : labels)
          if (l != kSilence && !vocab->find(l))
            BadLine(ErrorKind::kUnknownLabel, align_path.string(), row,
                    "alignment of '" + id + "' uses unknown label '" + l + "'");
      // Adjacent repeats with no silence between them form a single run, so
      // compare with repeats merged on both sides.
      auto merge = [](const std::vector<std::string> &v) {
        std::vector<std::string> m;
        for (const auto &w : v)
          if (m.empty() || m.back() != w) m.push_back(w);
        return m;
      };
      if (merge(CollapseAlignment(labels)) != merge(u.words))
        BadLine(ErrorKind::kMalformedHeader, align_path.string(), row,
                "alignment of '" + id + "' does not collapse to its transcript");
      u.alignment = std::move(labels);
    }
  }
  return corpus;
}

// Splits ---------------------------------------------------------------------

std::pair<Corpus, Corpus> TrainDevSplit(const Corpus &corpus, double fraction, std::uint64_t seed) {
  Require(fraction > 0.0 && fraction < 1.0, "TrainDevSplit: fraction must be in (0, 1)");
  const std::size_t n = corpus.size();
  const auto n_train = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  Require(n_train >= 1 && n_train < n,
          "TrainDevSplit: " + std::to_string(n) + " utterances at fraction " +
              fmt::format("{}", fraction) + " leave an empty side");
  Rng rng(seed);
  auto perm = rng.Permutation(n);
  std::vector<std::size_t> train_idx(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::sort(train_idx.begin(), train_idx.end());
  std::pair<Corpus, Corpus> out;
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (k < train_idx.size() && train_idx[k] == i) {
      out.first.push_back(corpus[i]);
      ++k;
    } else {
      out.second.push_back(corpus[i]);
    }
  }
  return out;
}

Corpus SubsetFraction(const Corpus &corpus, double fraction, std::uint64_t seed) {
  Require(fraction > 0.0 && fraction <= 1.0, "SubsetFraction: fraction must be in (0, 1]");
  Require(!corpus.empty(), "SubsetFraction: empty corpus");
  if (fraction == 1.0) return corpus;
  const auto keep = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(corpus.size()))));
  Rng rng(seed);
  auto perm = rng.Permutation(corpus.size());
  perm.resize(keep);
  std::sort(perm.begin(), perm.end());
  Corpus out;
  for (std::size_t i : perm) out.push_back(corpus[i]);
  return out;
}

}  // namespace a2w
