// src/network.cpp

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

#include "a2w/network.hpp"

#include <atomic>
#include <fstream>
#include <numeric>

#include "a2w/binary_io.hpp"
#include "a2w/error.hpp"
#include "a2w/rng.hpp"

namespace a2w {

namespace {

std::atomic<std::uint64_t> g_generation{1};

inline double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void CheckShape(bool ok, const std::string &what) {
  Require(ok, what, ErrorKind::kDimensionMismatch);
}

}  // namespace

std::string ToString(ModelMode mode) {
  switch (mode) {
    case ModelMode::kWordCtc: return "word-ctc";
    case ModelMode::kPhonemeCtc: return "phoneme-ctc";
    case ModelMode::kFrameClassifier: return "frame-classifier";
  }
  return "unknown";
}

ModelMode ParseModelMode(const std::string &name) {
  if (name == "word-ctc") return ModelMode::kWordCtc;
  if (name == "phoneme-ctc") return ModelMode::kPhonemeCtc;
  if (name == "frame-classifier") return ModelMode::kFrameClassifier;
  Fail(ErrorKind::kInvalidArgument, "unknown model mode '" + name + "'");
}

LstmLayer::LstmLayer(int input_dim, int hidden_dim)
    : wx(Mat::Zero(4 * hidden_dim, input_dim)),
      wh(Mat::Zero(4 * hidden_dim, hidden_dim)),
      b(Vec::Zero(4 * hidden_dim)) {}

LstmTape LstmForward(const LstmLayer &layer, const Mat &inputs) {
  CheckShape(inputs.rows() == layer.input_dim(),
             "LstmForward: input dim " + std::to_string(inputs.rows()) + " != layer input dim " +
                 std::to_string(layer.input_dim()));
  const Eigen::Index hidden = layer.hidden_dim();
  const Eigen::Index frames = inputs.cols();
  LstmTape tape;
  tape.x = inputs;
  tape.gates.resize(4 * hidden, frames);
  tape.c.resize(hidden, frames);
  tape.h.resize(hidden, frames);
  if (frames == 0) return tape;

  tape.gates.noalias() = layer.wx * inputs;
  tape.gates.colwise() += layer.b;
  Vec h_prev = Vec::Zero(hidden), c_prev = Vec::Zero(hidden);
  for (Eigen::Index t = 0; t < frames; ++t) {
    auto a = tape.gates.col(t);
    a.noalias() += layer.wh * h_prev;
    for (Eigen::Index j = 0; j < 3 * hidden; ++j) a(j) = Sigmoid(a(j));
    for (Eigen::Index j = 3 * hidden; j < 4 * hidden; ++j) a(j) = std::tanh(a(j));
    auto c = tape.c.col(t);
    auto h = tape.h.col(t);
    c = a.segment(hidden, hidden).cwiseProduct(c_prev) +
        a.segment(0, hidden).cwiseProduct(a.segment(3 * hidden, hidden));
    h = a.segment(2 * hidden, hidden).cwiseProduct(c.array().tanh().matrix());
    h_prev = h;
    c_prev = c;
  }
  return tape;
}

LstmGrads LstmBackward(const LstmLayer &layer, const LstmTape &tape, const Mat &dh, Mat *dx) {
  const Eigen::Index hidden = layer.hidden_dim();
  const Eigen::Index frames = tape.h.cols();
  CheckShape(dh.rows() == hidden && dh.cols() == frames, "LstmBackward: gradient shape mismatch");

  Mat da(4 * hidden, frames);
  Vec dh_next = Vec::Zero(hidden), dc_next = Vec::Zero(hidden);
  for (Eigen::Index t = frames - 1; t >= 0; --t) {
    const auto g = tape.gates.col(t);
    const auto in = g.segment(0, hidden).array();
    const auto fg = g.segment(hidden, hidden).array();
    const auto og = g.segment(2 * hidden, hidden).array();
    const auto cand = g.segment(3 * hidden, hidden).array();
    const Eigen::ArrayXd tc = tape.c.col(t).array().tanh();
    const Eigen::ArrayXd c_prev =
        t > 0 ? Eigen::ArrayXd(tape.c.col(t - 1).array()) : Eigen::ArrayXd::Zero(hidden);

    const Eigen::ArrayXd dht = dh.col(t).array() + dh_next.array();
    const Eigen::ArrayXd dc = dc_next.array() + dht * og * (1.0 - tc.square());
    auto d = da.col(t);
    d.segment(0, hidden) = (dc * cand * in * (1.0 - in)).matrix();
    d.segment(hidden, hidden) = (dc * c_prev * fg * (1.0 - fg)).matrix();
    d.segment(2 * hidden, hidden) = (dht * tc * og * (1.0 - og)).matrix();
    d.segment(3 * hidden, hidden) = (dc * in * (1.0 - cand.square())).matrix();
    dc_next = (dc * fg).matrix();
    dh_next.noalias() = layer.wh.transpose() * d;
  }

  LstmGrads grads;
  grads.wx.noalias() = da * tape.x.transpose();
  grads.wh = Mat::Zero(4 * hidden, hidden);
  if (frames > 1)
    grads.wh.noalias() = da.rightCols(frames - 1) * tape.h.leftCols(frames - 1).transpose();
  grads.b = da.rowwise().sum();
  if (dx) dx->noalias() = layer.wx.transpose() * da;
  return grads;
}

Mat Downsample(const Mat &seq) {
  Require(seq.cols() >= 2, "Downsample: need at least 2 frames, got " + std::to_string(seq.cols()));
  const Eigen::Index out = seq.cols() / 2;
  Mat r(seq.rows(), out);
  for (Eigen::Index j = 0; j < out; ++j) r.col(j) = seq.col(2 * j);
  return r;
}

Mat UpsampleGrad(const Mat &grad, Eigen::Index original_frames) {
  CheckShape(grad.cols() == original_frames / 2, "UpsampleGrad: length mismatch");
  Mat r = Mat::Zero(grad.rows(), original_frames);
  for (Eigen::Index j = 0; j < grad.cols(); ++j) r.col(2 * j) = grad.col(j);
  return r;
}

int NetworkConfig::total_reductions() const {
  return std::accumulate(reductions.begin(), reductions.end(), 0);
}

Eigen::Index NetworkConfig::OutputFrames(Eigen::Index input_frames) const {
  Eigen::Index t = input_frames;
  for (int i = 0; i < total_reductions(); ++i) t /= 2;
  return t;
}

std::vector<int> DownsamplePlan(int m, int num_layers) {
  Require(m >= 0, "DownsamplePlan: negative exponent");
  Require(num_layers >= 1, "DownsamplePlan: need at least one layer");
  std::vector<int> plan(static_cast<std::size_t>(num_layers) + 1, 0);
  const int after = std::min(m, num_layers);
  for (int i = 1; i <= after; ++i) plan[static_cast<std::size_t>(i)] = 1;
  plan[0] += m - after;
  return plan;
}

int FactorToExponent(int factor) {
  Require(factor >= 1 && (factor & (factor - 1)) == 0,
          "down-sampling factor must be a power of two, got " + std::to_string(factor));
  int m = 0;
  while ((1 << m) < factor) ++m;
  return m;
}

std::vector<std::span<double>> NetworkGradients::Spans() {
  std::vector<std::span<double>> s;
  for (auto &l : layers) {
    s.push_back(Flat(l.wx));
    s.push_back(Flat(l.wh));
    s.push_back(Flat(l.b));
  }
  s.push_back(Flat(w_out));
  s.push_back(Flat(b_out));
  return s;
}

Network::Network(NetworkConfig config, Vocabulary vocab)
    : config_(std::move(config)), vocab_(std::move(vocab)) {
  Require(config_.num_layers >= 1, "Network: need at least one LSTM layer");
  Require(config_.input_dim >= 1 && config_.hidden_dim >= 1, "Network: dimensions must be positive");
  Require(vocab_.size() >= 1, "Network: empty vocabulary");
  if (config_.reductions.empty())
    config_.reductions.assign(static_cast<std::size_t>(config_.num_layers) + 1, 0);
  Require(config_.reductions.size() == static_cast<std::size_t>(config_.num_layers) + 1,
          "Network: reductions must have num_layers + 1 entries");
  for (int r : config_.reductions) Require(r >= 0, "Network: negative reduction count");
  Require(config_.mode != ModelMode::kFrameClassifier || config_.total_reductions() == 0,
          "Network: frame classifiers predict every frame and cannot down-sample");
  for (int i = 0; i < config_.num_layers; ++i)
    layers_.emplace_back(i == 0 ? config_.input_dim : config_.hidden_dim, config_.hidden_dim);
  w_out_ = Mat::Zero(static_cast<Eigen::Index>(vocab_.output_dim()), config_.hidden_dim);
  b_out_ = Vec::Zero(static_cast<Eigen::Index>(vocab_.output_dim()));
  Touch();
}

Network Network::Random(NetworkConfig config, Vocabulary vocab, std::uint64_t seed) {
  Network net(std::move(config), std::move(vocab));
  net.InitRandom(seed);
  return net;
}

void Network::InitRandom(std::uint64_t seed) {
  Rng rng(seed);
  auto fill = [&rng](Mat &m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.Uniform(-0.05, 0.05);
  };
  for (auto &l : layers_) {
    fill(l.wx);
    fill(l.wh);
    const Eigen::Index h = l.hidden_dim();
    l.b.setZero();
    l.b.segment(h, h).setOnes();
  }
  fill(w_out_);
  b_out_.setZero();
  Touch();
}

void Network::Touch() { generation_ = g_generation.fetch_add(1); }

LstmLayer &Network::mutable_layer(std::size_t i) {
  Touch();
  return layers_.at(i);
}

Mat &Network::mutable_output_weights() {
  Touch();
  return w_out_;
}

Vec &Network::mutable_output_bias() {
  Touch();
  return b_out_;
}

std::vector<std::span<double>> Network::MutableParameterSpans() {
  Touch();
  std::vector<std::span<double>> s;
  for (auto &l : layers_) {
    s.push_back(Flat(l.wx));
    s.push_back(Flat(l.wh));
    s.push_back(Flat(l.b));
  }
  s.push_back(Flat(w_out_));
  s.push_back(Flat(b_out_));
  return s;
}

std::size_t Network::ParameterCount() const {
  std::size_t n = static_cast<std::size_t>(w_out_.size() + b_out_.size());
  for (const auto &l : layers_) n += static_cast<std::size_t>(l.wx.size() + l.wh.size() + l.b.size());
  return n;
}

void Network::ApplyGradients(NetworkGradients &grads, double scale) {
  Require(grads.layers.size() == layers_.size(), "ApplyGradients: layer count mismatch",
          ErrorKind::kDimensionMismatch);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    layers_[i].wx -= scale * grads.layers[i].wx;
    layers_[i].wh -= scale * grads.layers[i].wh;
    layers_[i].b -= scale * grads.layers[i].b;
  }
  w_out_ -= scale * grads.w_out;
  b_out_ -= scale * grads.b_out;
  Touch();
}

NetworkGradients Network::ZeroGradients() const {
  NetworkGradients g;
  for (const auto &l : layers_)
    g.layers.push_back({Mat::Zero(l.wx.rows(), l.wx.cols()), Mat::Zero(l.wh.rows(), l.wh.cols()),
                        Vec::Zero(l.b.size())});
  g.w_out = Mat::Zero(w_out_.rows(), w_out_.cols());
  g.b_out = Vec::Zero(b_out_.size());
  return g;
}

bool Network::operator==(const Network &o) const {
  return config_.mode == o.config_.mode && config_.input_dim == o.config_.input_dim &&
         config_.hidden_dim == o.config_.hidden_dim &&
         config_.num_layers == o.config_.num_layers &&
         config_.reductions == o.config_.reductions && vocab_ == o.vocab_ &&
         layers_ == o.layers_ && w_out_ == o.w_out_ && b_out_ == o.b_out_;
}

namespace {

Mat ApplyReductions(Mat seq, int count, std::vector<Eigen::Index> *pre_lengths) {
  for (int r = 0; r < count; ++r) {
    pre_lengths->push_back(seq.cols());
    seq = Downsample(seq);
  }
  return seq;
}

Mat UndoReductions(Mat grad, const std::vector<Eigen::Index> &pre_lengths) {
  for (auto it = pre_lengths.rbegin(); it != pre_lengths.rend(); ++it) grad = UpsampleGrad(grad, *it);
  return grad;
}

void CheckFrames(const Network &net, Eigen::Index frames) {
  // Every halving needs at least two frames at its input.
  Eigen::Index t = frames;
  for (int i = 0; i < net.config().total_reductions(); ++i) {
    if (t < 2)
      Fail(ErrorKind::kInvalidArgument,
           "input of " + std::to_string(frames) + " frames is too short for down-sampling by 2^" +
               std::to_string(net.config().total_reductions()));
    t /= 2;
  }
  Require(t >= 1, "network input must have at least one frame");
}

}  // namespace

ForwardResult NetworkForward(const Network &net, const Mat &features) {
  const auto &cfg = net.config();
  CheckShape(features.cols() == cfg.input_dim,
             "NetworkForward: feature dim " + std::to_string(features.cols()) +
                 " != model input dim " + std::to_string(cfg.input_dim));
  CheckFrames(net, features.rows());

  ForwardResult r;
  ForwardTape &tape = r.tape;
  tape.generation = net.generation();
  tape.input_frames = features.rows();
  tape.padded = net.lookahead() > 0;

  Mat seq = features.transpose();
  if (tape.padded) {
    seq.conservativeResize(Eigen::NoChange, seq.cols() + net.lookahead());
    seq.rightCols(net.lookahead()).setZero();
  }
  tape.pre_lengths.resize(net.layers().size());
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    seq = ApplyReductions(std::move(seq), cfg.reductions[i], &tape.pre_lengths[i]);
    tape.layers.push_back(LstmForward(net.layers()[i], seq));
    seq = tape.layers.back().h;
  }
  tape.top = ApplyReductions(std::move(seq), cfg.reductions.back(), &tape.top_pre_lengths);

  Mat logits = (net.output_weights() * tape.top).transpose();
  logits.rowwise() += net.output_bias().transpose();
  if (tape.padded) logits = logits.bottomRows(logits.rows() - net.lookahead()).eval();
  r.log_probs = LogSoftmaxRows(logits);
  return r;
}

Mat LayerOutput(const Network &net, const Mat &features, std::size_t layer) {
  Require(layer < net.layers().size(), "LayerOutput: layer index out of range");
  ForwardResult r = NetworkForward(net, features);
  return r.tape.layers[layer].h;
}

BackwardResult NetworkBackward(const Network &net, const ForwardTape &tape,
                               const Mat &output_grads) {
  if (tape.generation != net.generation())
    Fail(ErrorKind::kStaleTape, "NetworkBackward: tape does not match the network's parameters");
  const Eigen::Index top_frames = tape.top.cols();
  const Eigen::Index out_frames = top_frames - (tape.padded ? net.lookahead() : 0);
  CheckShape(output_grads.rows() == out_frames && output_grads.cols() == net.output_dim(),
             "NetworkBackward: output gradient shape mismatch");

  Mat g = Mat::Zero(top_frames, net.output_dim());
  g.bottomRows(out_frames) = output_grads;

  BackwardResult r;
  NetworkGradients &pg = r.params;
  pg.layers.resize(net.layers().size());
  pg.w_out.noalias() = g.transpose() * tape.top.transpose();
  pg.b_out = g.colwise().sum().transpose();

  Mat dh = net.output_weights().transpose() * g.transpose();  // H x T'
  dh = UndoReductions(std::move(dh), tape.top_pre_lengths);
  for (std::size_t i = net.layers().size(); i-- > 0;) {
    Mat dx;
    pg.layers[i] = LstmBackward(net.layers()[i], tape.layers[i], dh, &dx);
    dh = UndoReductions(std::move(dx), tape.pre_lengths[i]);
  }
  // dh now holds d/d(input) in d x T layout, possibly padded.
  r.input_grads = dh.leftCols(tape.input_frames).transpose();
  return r;
}

void TransferBottomLayers(const Network &src, Network &dst, std::size_t k) {
  Require(k < dst.layers().size(), "TransferBottomLayers: k=" + std::to_string(k) +
                                       " must be below the destination layer count " +
                                       std::to_string(dst.layers().size()));
  Require(k <= src.layers().size(), "TransferBottomLayers: source has only " +
                                        std::to_string(src.layers().size()) + " layers",
          ErrorKind::kDimensionMismatch);
  for (std::size_t i = 0; i < k; ++i) {
    const auto &s = src.layers()[i];
    const auto &d = dst.layers()[i];
    CheckShape(s.input_dim() == d.input_dim() && s.hidden_dim() == d.hidden_dim(),
               "TransferBottomLayers: layer " + std::to_string(i + 1) + " shape mismatch (" +
                   std::to_string(s.input_dim()) + "->" + std::to_string(s.hidden_dim()) +
                   " vs " + std::to_string(d.input_dim()) + "->" +
                   std::to_string(d.hidden_dim()) + ")");
  }
  for (std::size_t i = 0; i < k; ++i) dst.mutable_layer(i) = src.layers()[i];
}

namespace {

constexpr char kModelMagic[8] = {'A', '2', 'W', 'M', 'O', 'D', 'E', 'L'};

void WriteMatrix(std::ostream &os, const Mat &m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) binary::WriteF64(os, m(r, c));
}

void WriteVector(std::ostream &os, const Vec &v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) binary::WriteF64(os, v(i));
}

void ReadMatrix(binary::Reader &in, Mat &m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = in.F64();
}

void ReadVector(binary::Reader &in, Vec &v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = in.F64();
}

}  // namespace

void SaveModel(const Network &net, std::ostream &os) {
  const auto &cfg = net.config();
  os.write(kModelMagic, sizeof(kModelMagic));
  binary::WriteU32(os, kModelFormatVersion);
  binary::WriteU32(os, static_cast<std::uint32_t>(cfg.mode));
  binary::WriteU32(os, static_cast<std::uint32_t>(cfg.num_layers));
  binary::WriteU32(os, static_cast<std::uint32_t>(cfg.input_dim));
  binary::WriteU32(os, static_cast<std::uint32_t>(cfg.hidden_dim));
  binary::WriteU32(os, static_cast<std::uint32_t>(net.output_dim()));
  binary::WriteU32(os, static_cast<std::uint32_t>(net.lookahead()));
  for (int r : cfg.reductions) binary::WriteU32(os, static_cast<std::uint32_t>(r));
  binary::WriteU32(os, static_cast<std::uint32_t>(net.vocab().size()));
  for (const auto &l : net.vocab().labels()) binary::WriteString(os, l);
  for (const auto &l : net.layers()) {
    WriteMatrix(os, l.wx);
    WriteMatrix(os, l.wh);
    WriteVector(os, l.b);
  }
  WriteMatrix(os, net.output_weights());
  WriteVector(os, net.output_bias());
  if (!os) Fail(ErrorKind::kIo, "SaveModel: write failed");
}

Network LoadModel(std::istream &is) {
  binary::Reader in(is, "model");
  char magic[sizeof(kModelMagic)];
  in.ReadBytes(magic, sizeof(magic));
  if (!std::equal(std::begin(magic), std::end(magic), std::begin(kModelMagic)))
    in.Malformed("bad magic", 0);
  std::size_t at = in.offset();
  if (in.U32() != kModelFormatVersion) in.Malformed("unsupported format version", at);
  at = in.offset();
  const std::uint32_t mode = in.U32();
  if (mode > 2) in.Malformed("unknown mode tag " + std::to_string(mode), at);

  NetworkConfig cfg;
  cfg.mode = static_cast<ModelMode>(mode);
  at = in.offset();
  const std::uint32_t layers = in.U32();
  if (layers == 0 || layers > 1024) in.Malformed("implausible layer count", at);
  cfg.num_layers = static_cast<int>(layers);
  at = in.offset();
  cfg.input_dim = static_cast<int>(in.U32());
  cfg.hidden_dim = static_cast<int>(in.U32());
  if (cfg.input_dim <= 0 || cfg.hidden_dim <= 0 || cfg.input_dim > (1 << 20) ||
      cfg.hidden_dim > (1 << 16))
    in.Malformed("implausible dimensions", at);
  at = in.offset();
  const std::uint32_t output_dim = in.U32();
  const std::uint32_t lookahead = in.U32();
  for (std::uint32_t i = 0; i <= layers; ++i) {
    const std::size_t rat = in.offset();
    const std::uint32_t r = in.U32();
    if (r > 62) in.Malformed("implausible reduction count", rat);
    cfg.reductions.push_back(static_cast<int>(r));
  }
  const std::size_t vat = in.offset();
  const std::uint32_t vocab_size = in.U32();
  if (vocab_size + 1 != output_dim) in.Malformed("vocabulary size does not match output dim", vat);
  std::vector<std::string> labels;
  labels.reserve(vocab_size);
  for (std::uint32_t i = 0; i < vocab_size; ++i) labels.push_back(in.String());

  Network net;
  try {
    net = Network(cfg, Vocabulary(std::move(labels)));
  } catch (const Error &e) {
    in.Malformed(e.what(), at);
  }
  if (static_cast<int>(lookahead) != net.lookahead()) in.Malformed("lookahead does not match mode", at);
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    ReadMatrix(in, net.mutable_layer(i).wx);
    ReadMatrix(in, net.mutable_layer(i).wh);
    ReadVector(in, net.mutable_layer(i).b);
  }
  ReadMatrix(in, net.mutable_output_weights());
  ReadVector(in, net.mutable_output_bias());
  return net;
}

void SaveModel(const Network &net, const std::string &path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) Fail(ErrorKind::kIo, "cannot open '" + path + "' for writing");
  SaveModel(net, os);
}

Network LoadModel(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Fail(ErrorKind::kIo, "cannot open model file '" + path + "'");
  return LoadModel(is);
}

}  // namespace a2w
