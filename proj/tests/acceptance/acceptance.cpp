// tests/acceptance/acceptance.cpp

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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Criteria 1-5 run in-process against independent
// oracles; 6-10 drive the a2w binary on the default synthetic corpus.
//
//   a2w_acceptance --work-dir DIR [--only N]...

#include <sys/wait.h>

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <fmt/core.h>

#include "a2w/ctc.hpp"
#include "a2w/error.hpp"
#include "a2w/metrics.hpp"
#include "a2w/network.hpp"
#include "oracles.hpp"

namespace a2w {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Toy model for the training criteria. The CLI defaults (500 x 4) are the
// full-size recipe; the toy keeps the depth and shrinks the width so that a
// 40-epoch run fits the time budget on one core.
constexpr int kToyHidden = 64;
constexpr int kToyLayers = 4;

// Finite differences at step 1e-6 carry about 1e-10 to 1e-9 of absolute
// roundoff; relative error is measured against at least this magnitude.
constexpr double kFdFloor = 1e-5;

// ---------------------------------------------------------------------------
// Criterion 1: forward recursion against the summed pre-image.

Outcome CtcOracleEquivalence() {
  const auto start = Clock::now();
  std::mt19937 gen(101);
  std::uniform_int_distribution<int> frames_d(1, 8), vocab_d(1, 4), len_d(0, 4);
  int cases = 0, feasible = 0;
  double worst = 0.0;
  for (; cases < 1500; ++cases) {
    const int frames = frames_d(gen), vocab = vocab_d(gen), len = len_d(gen);
    std::uniform_int_distribution<int> sym(0, vocab - 1);
    LabelSequence y(static_cast<std::size_t>(len));
    for (auto &l : y) l = sym(gen);
    const Mat lattice = oracle::RandomLattice(gen, frames, vocab + 1, 3.0);
    const Label blank = vocab;

    const auto preimage = EnumeratePreimage(y, static_cast<std::size_t>(frames), blank);
    long double sum = 0.0L;
    for (const auto &z : preimage) {
      long double p = 1.0L;
      for (std::size_t t = 0; t < z.size(); ++t)
        p *= std::exp(static_cast<long double>(lattice(static_cast<Eigen::Index>(t), z[t])));
      sum += p;
    }
    // The pre-image itself is checked against a plain scan of all paths.
    std::set<AlignmentPath> scanned;
    oracle::ForEachPath(vocab + 1, frames, [&](const oracle::Path &z) {
      if (oracle::Collapse(z, blank) == y) scanned.insert(AlignmentPath(z.begin(), z.end()));
    });
    if (std::set<AlignmentPath>(preimage.begin(), preimage.end()) != scanned || preimage.size() != scanned.size())
      return {false, fmt::format("case {}: pre-image differs from the path scan", cases)};

    const double p = std::exp(CtcLogLikelihood(lattice, y));
    const double err = std::fabs(p - static_cast<double>(sum));
    worst = std::max(worst, err);
    feasible += !preimage.empty();
    if (err > 1e-10) return {false, fmt::format("case {}: |{} - {}| = {:.3g}", cases, p, static_cast<double>(sum), err)};
  }
  const double secs = Seconds(start);
  return {secs <= 60.0, fmt::format("{} cases ({} feasible), max abs error {:.3g}, {:.1f} s (limit 60 s)", cases,
                                    feasible, worst, secs)};
}

// ---------------------------------------------------------------------------
// Criterion 2: sum over every label sequence of p(y|x) is one.

void AllSequences(int vocab, int max_len, const std::function<void(const LabelSequence &)> &f) {
  for (const auto &s : oracle::AllStrings(vocab, static_cast<std::size_t>(max_len)))
    f(LabelSequence(s.begin(), s.end()));
}

Outcome Normalization() {
  std::mt19937 gen(202);
  double worst = 0.0;
  int lattices = 0;
  for (int frames = 1; frames <= 5; ++frames)
    for (int vocab = 1; vocab <= 3; ++vocab)
      for (int rep = 0; rep < 5; ++rep, ++lattices) {
        const Mat lattice = oracle::RandomLattice(gen, frames, vocab + 1, 3.0);
        double total = 0.0;
        AllSequences(vocab, frames, [&](const LabelSequence &y) { total += std::exp(CtcLogLikelihood(lattice, y)); });
        worst = std::max(worst, std::fabs(total - 1.0));
      }
  return {worst <= 1e-9, fmt::format("{} lattices, T' <= 5, V <= 3, max |sum - 1| = {:.3g}", lattices, worst)};
}

// ---------------------------------------------------------------------------
// Criterion 3: analytic gradients against central differences.

Outcome GradientExactness() {
  const auto start = Clock::now();
  std::mt19937 gen(303);
  double worst_ctc = 0.0, worst_net = 0.0;
  std::size_t coords = 0;

  // CTC gradient with respect to the logits.
  for (int rep = 0; rep < 20; ++rep) {
    const int vocab = 1 + rep % 4, frames = 3 + rep % 6;
    std::uniform_int_distribution<int> sym(0, vocab - 1);
    std::uniform_int_distribution<int> len(1, 3);
    LabelSequence y;
    do {
      y.assign(static_cast<std::size_t>(len(gen)), 0);
      for (auto &l : y) l = sym(gen);
    } while (MinFramesFor(y) > static_cast<std::size_t>(frames));
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    Mat logits(frames, vocab + 1);
    for (auto &x : Flat(logits)) x = u(gen);
    const Mat g = CtcGradient(LogSoftmaxRows(logits), y);
    for (Eigen::Index i = 0; i < logits.size(); ++i, ++coords) {
      const double fd = oracle::CentralDifference(
          [&] { return -CtcLogLikelihood(LogSoftmaxRows(logits), y); }, logits.data() + i, 1e-6);
      worst_ctc = std::max(worst_ctc, oracle::RelativeError(g.data()[i], fd, kFdFloor));
    }
  }

  // Whole network: 2 layers, hidden 8, V = 3, T = 7, one halving.
  NetworkConfig cfg;
  cfg.input_dim = 3;
  cfg.hidden_dim = 8;
  cfg.num_layers = 2;
  cfg.reductions = DownsamplePlan(1, 2);
  Network net(cfg, Vocabulary({"a", "b", "c"}));
  std::uniform_real_distribution<double> w(-0.6, 0.6);
  for (auto span : net.MutableParameterSpans())
    for (double &x : span) x = w(gen);
  Mat x(7, 3);
  for (auto &v : Flat(x)) v = w(gen);
  const LabelSequence y{2, 0};
  auto loss = [&] { return -CtcLogLikelihood(NetworkForward(net, x).log_probs, y); };
  const ForwardResult fwd = NetworkForward(net, x);
  BackwardResult bwd = NetworkBackward(net, fwd.tape, CtcGradient(fwd.log_probs, y));
  auto analytic = bwd.params.Spans();
  auto params = net.MutableParameterSpans();
  for (std::size_t s = 0; s < params.size(); ++s)
    for (std::size_t i = 0; i < params[s].size(); ++i, ++coords) {
      const double fd = oracle::CentralDifference(loss, &params[s][i], 1e-6);
      worst_net = std::max(worst_net, oracle::RelativeError(analytic[s][i], fd, kFdFloor));
    }
  for (Eigen::Index i = 0; i < x.size(); ++i, ++coords) {
    const double fd = oracle::CentralDifference(loss, x.data() + i, 1e-6);
    worst_net = std::max(worst_net, oracle::RelativeError(bwd.input_grads.data()[i], fd, kFdFloor));
  }
  const double secs = Seconds(start);
  const bool ok = worst_ctc < 1e-4 && worst_net < 1e-4 && secs <= 120.0;
  return {ok, fmt::format("{} coordinates, max rel error ctc {:.3g} network {:.3g}, {:.1f} s (limit 120 s)", coords,
                          worst_ctc, worst_net, secs)};
}

// ---------------------------------------------------------------------------
// Criterion 4: halving keeps 1-based frames 1, 3, ..., 2*floor(T/2)-1.

Outcome DownsamplingLaw() {
  for (int frames = 2; frames <= 64; ++frames) {
    Mat seq(1, frames);
    for (int t = 0; t < frames; ++t) seq(0, t) = t + 1;
    const Mat out = Downsample(seq);
    if (out.cols() != frames / 2) return {false, fmt::format("T = {}: length {}", frames, out.cols())};
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      if (out(0, j) != 2.0 * static_cast<double>(j) + 1.0)
        return {false, fmt::format("T = {}: output {} is frame {}", frames, j, out(0, j))};
  }
  return {true, "T in [2, 64]: length floor(T/2), frames 1, 3, ..., 2 floor(T/2) - 1"};
}

// ---------------------------------------------------------------------------
// Criterion 5: edit distance against breadth-first search on the edit graph.

Outcome EditDistanceOracle() {
  const auto strings = oracle::AllStrings(3, 6);
  std::size_t pairs = 0;
  for (const auto &ref : strings) {
    const auto dist = oracle::EditGraphDistances(ref, 3, 6);
    for (const auto &hyp : strings) {
      const EditStats s = EditDistance(ref, hyp);
      ++pairs;
      const bool consistent = s.ref_length == ref.size() && hyp.size() + s.deletions == ref.size() + s.insertions;
      if (static_cast<int>(s.errors()) != dist.at(hyp) || !consistent)
        return {false, fmt::format("pair #{}: {} errors, search says {}", pairs, s.errors(), dist.at(hyp))};
    }
  }
  return {true, fmt::format("{} pairs of length <= 6 over 3 symbols", pairs)};
}

// ---------------------------------------------------------------------------
// Criteria 6-10 run the a2w binary.

class Pipeline {
 public:
  explicit Pipeline(fs::path root) : root_(std::move(root)) {}

  const fs::path &root() const { return root_; }

  // Returns the exit status; output goes to <root>/<log>.
  int Run(const std::string &args, const std::string &log) const {
    const std::string cmd = "'" + std::string(A2W_CLI_PATH) + "' " + args + " > '" + (root_ / log).string() + "' 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string Path(const std::string &rel) const { return "'" + (root_ / rel).string() + "'"; }

 private:
  fs::path root_;
};

std::string Slurp(const fs::path &p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> ReadSummary(const fs::path &p) {
  std::map<std::string, std::string> out;
  std::istringstream is(Slurp(p));
  std::string line;
  while (std::getline(is, line)) {
    const auto tab = line.find('\t');
    if (tab != std::string::npos) out[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return out;
}

// Pooled rate from the TOTAL line of score.tsv.
double TotalRate(const fs::path &score) {
  std::istringstream is(Slurp(score));
  std::string line;
  while (std::getline(is, line))
    if (line.rfind("TOTAL\t", 0) == 0) return std::stod(line.substr(line.rfind('\t') + 1));
  throw Error(ErrorKind::kMalformedHeader, score.string() + ": no TOTAL line");
}

struct ToyRun {
  bool ok = false;
  std::string failure;
  double dev_wer = 0.0;
  double train_seconds = 0.0;
  int best_epoch = 0;
};

// Trains a toy word model at the given frame-rate reduction on the default
// corpus, decodes dev and scores it.
ToyRun TrainToy(const Pipeline &p, int factor) {
  ToyRun r;
  const std::string tag = fmt::format("x{}", factor);
  const auto start = Clock::now();
  const int rc = p.Run(fmt::format("train --mode word-ctc --train {} --dev {} --hidden {} --layers {} "
                                   "--downsample {} --out-dir {}",
                                   p.Path("corpus/train"), p.Path("corpus/dev"), kToyHidden, kToyLayers, factor,
                                   p.Path("model_" + tag)),
                       "train_" + tag + ".log");
  r.train_seconds = Seconds(start);
  if (rc != 0) {
    r.failure = fmt::format("train exited {}", rc);
    return r;
  }
  if (p.Run(fmt::format("decode --model {} --data {} --out-dir {}", p.Path("model_" + tag + "/model.a2w"),
                        p.Path("corpus/dev"), p.Path("decode_" + tag)),
            "decode_" + tag + ".log") != 0 ||
      p.Run(fmt::format("score --ref {} --hyp {} --out-dir {}", p.Path("decode_" + tag + "/ref.txt"),
                        p.Path("decode_" + tag + "/hyp.txt"), p.Path("score_" + tag)),
            "score_" + tag + ".log") != 0) {
    r.failure = "decode or score failed";
    return r;
  }
  r.dev_wer = TotalRate(p.root() / ("score_" + tag) / "score.tsv");
  r.best_epoch = std::stoi(ReadSummary(p.root() / ("model_" + tag) / "train_summary.tsv").at("best_epoch"));
  r.ok = true;
  return r;
}

// Every regular file under a directory, relative path -> bytes.
std::map<std::string, std::string> Snapshot(const fs::path &dir) {
  std::map<std::string, std::string> out;
  for (const auto &e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = Slurp(e.path());
  return out;
}

// One complete synth -> train -> decode -> score -> analyze run at reduced
// size into <dir>.
bool SmallPipeline(const Pipeline &p, const std::string &dir) {
  const auto path = [&](const std::string &rel) { return p.Path(dir + "/" + rel); };
  return p.Run("synth --train-size 40 --dev-size 8 --test-size 8 --seed 5 --out-dir " + path("corpus"),
               dir + "_synth.log") == 0 &&
         p.Run("train --quiet --train " + path("corpus/train") + " --dev " + path("corpus/dev") +
                   " --vocab " + path("corpus/words.txt") +
                   " --hidden 16 --layers 2 --downsample 2 --phase1-epochs 2 --phase2-epochs 2 --seed 9 --out-dir " +
                   path("model"),
               dir + "_train.log") == 0 &&
         p.Run("decode --model " + path("model/model.a2w") + " --data " + path("corpus/test") + " --out-dir " +
                   path("decode"),
               dir + "_decode.log") == 0 &&
         p.Run("score --ref " + path("decode/ref.txt") + " --hyp " + path("decode/hyp.txt") + " --out-dir " +
                   path("score"),
               dir + "_score.log") == 0 &&
         p.Run("analyze --model " + path("model/model.a2w") + " --lexicon " + path("corpus/lexicon.tsv") +
                   " --train " + path("corpus/train") + " --overlap --blank --margin --permutations 500 --out-dir " +
                   path("analysis"),
               dir + "_analyze.log") == 0;
}

Outcome Determinism(const Pipeline &p) {
  fs::remove_all(p.root() / "run_a");
  fs::remove_all(p.root() / "run_b");
  if (!SmallPipeline(p, "run_a") || !SmallPipeline(p, "run_b")) return {false, "a pipeline stage failed"};
  const auto a = Snapshot(p.root() / "run_a"), b = Snapshot(p.root() / "run_b");
  if (a.size() != b.size()) return {false, fmt::format("{} files vs {}", a.size(), b.size())};
  for (const auto &[name, bytes] : a) {
    const auto it = b.find(name);
    if (it == b.end()) return {false, name + " missing from the second run"};
    if (it->second != bytes) return {false, name + " differs"};
  }
  return {true, fmt::format("{} output files identical across two runs (model, logs, decodes, scores, analyses)",
                            a.size())};
}

void Report(int id, const std::string &name, const Outcome &o, int &failures) {
  std::cout << fmt::format("[{}] {:>2} {}: {}", o.pass ? "PASS" : "FAIL", id, name, o.detail) << std::endl;
  failures += !o.pass;
}

}  // namespace
}  // namespace a2w

int main(int argc, char **argv) {
  using namespace a2w;
  CLI::App app{"a2w acceptance suite"};
  std::string work_dir;
  std::vector<int> only;
  app.add_option("--work-dir", work_dir, "Scratch directory for the pipeline criteria")->required();
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const auto wanted = [&](int id) { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); };
  int failures = 0;
  auto guarded = [&](int id, const std::string &name, const std::function<Outcome()> &f) {
    if (!wanted(id)) return;
    Outcome o;
    try {
      o = f();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    Report(id, name, o, failures);
  };

  guarded(1, "ctc oracle equivalence", CtcOracleEquivalence);
  guarded(2, "normalization", Normalization);
  guarded(3, "gradient exactness", GradientExactness);
  guarded(4, "down-sampling law", DownsamplingLaw);
  guarded(5, "edit-distance oracle", EditDistanceOracle);

  const bool need_toy = wanted(6) || wanted(7) || wanted(8) || wanted(9);
  if (need_toy || wanted(10)) {
    fs::create_directories(work_dir);
    const Pipeline p(fs::absolute(work_dir));
    if (need_toy) {
      fs::remove_all(p.root() / "corpus");
      const bool synth_ok = p.Run("synth --out-dir " + p.Path("corpus"), "synth.log") == 0;
      ToyRun full, reduced;
      if (synth_ok && (wanted(6) || wanted(7) || wanted(8) || wanted(9))) full = TrainToy(p, 1);
      if (synth_ok && wanted(7)) reduced = TrainToy(p, 4);
      const std::string no_corpus = "synth failed; see synth.log";

      guarded(6, "toy convergence", [&]() -> Outcome {
        if (!synth_ok) return {false, no_corpus};
        if (!full.ok) return {false, full.failure};
        const bool ok = full.dev_wer <= 20.0 && full.train_seconds <= 1800.0;
        return {ok, fmt::format("default corpus, {}x{} word CTC, 40 epochs: dev WER {:.2f}% (limit 20%), "
                                "best epoch {}, {:.0f} s (limit 1800 s)",
                                kToyLayers, kToyHidden, full.dev_wer, full.best_epoch, full.train_seconds)};
      });
      guarded(7, "down-sampling trend", [&]() -> Outcome {
        if (!synth_ok) return {false, no_corpus};
        if (!full.ok || !reduced.ok) return {false, full.ok ? reduced.failure : full.failure};
        return {reduced.dev_wer < full.dev_wer,
                fmt::format("dev WER at factor 4: {:.2f}%, at factor 1: {:.2f}% (needs 4 < 1)", reduced.dev_wer,
                            full.dev_wer)};
      });

      bool analyzed = false;
      std::map<std::string, std::string> overlap, blank, margin;
      if (full.ok && (wanted(8) || wanted(9))) {
        analyzed = p.Run("analyze --model " + p.Path("model_x1/model.a2w") + " --lexicon " +
                             p.Path("corpus/lexicon.tsv") + " --train " + p.Path("corpus/train") +
                             " --overlap --blank --margin --out-dir " + p.Path("analysis_x1"),
                         "analyze_x1.log") == 0;
        if (analyzed) {
          overlap = ReadSummary(p.root() / "analysis_x1" / "overlap_summary.tsv");
          blank = ReadSummary(p.root() / "analysis_x1" / "blank_summary.tsv");
          margin = ReadSummary(p.root() / "analysis_x1" / "freq_margin_summary.tsv");
        }
      }
      guarded(8, "neighbor pronunciation overlap", [&]() -> Outcome {
        if (!analyzed) return {false, "no converged model or analyze failed"};
        const double close = std::stod(overlap.at("close_mean")), far = std::stod(overlap.at("far_mean"));
        const double pv = std::stod(overlap.at("permutation_p"));
        return {close > far && pv < 0.01,
                fmt::format("mean overlap ranks 1-3 {:.4f} vs ranks 48-50 {:.4f}, permutation p = {:.4g} (needs < "
                            "0.01)",
                            close, far, pv)};
      });
      guarded(9, "blank distance and frequency margin", [&]() -> Outcome {
        if (!analyzed) return {false, "no converged model or analyze failed"};
        const double bm = std::stod(blank.at("blank_mean")), med = std::stod(blank.at("pooled_median"));
        const std::string rho = margin.at("spearman");
        const bool rho_ok = rho != "undefined" && std::stod(rho) > 0.0;
        return {bm > med && rho_ok, fmt::format("blank mean distance {:.4f} vs word-word median {:.4f}; "
                                                "frequency-margin spearman {}",
                                                bm, med, rho)};
      });
    }
    guarded(10, "determinism", [&] { return Determinism(p); });
  }

  std::cout << (failures == 0 ? "all criteria passed" : fmt::format("{} criteria failed", failures)) << std::endl;
  return failures == 0 ? 0 : 1;
}
