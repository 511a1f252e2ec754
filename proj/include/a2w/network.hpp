// a2w/network.hpp

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

#ifndef A2W_NETWORK_HPP_
#define A2W_NETWORK_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "a2w/ctc.hpp"
#include "a2w/numerics.hpp"

namespace a2w {

enum class ModelMode : std::uint32_t {
  kWordCtc = 0,
  kPhonemeCtc = 1,
  kFrameClassifier = 2,
};

std::string ToString(ModelMode mode);
ModelMode ParseModelMode(const std::string &name);
inline bool IsCtc(ModelMode m) { return m != ModelMode::kFrameClassifier; }

/// One unidirectional LSTM layer without peepholes. Gate rows are stacked in
/// the order input, forget, output, cell.
struct LstmLayer {
  Mat wx;  // 4H x I
  Mat wh;  // 4H x H
  Vec b;   // 4H

  LstmLayer() = default;
  LstmLayer(int input_dim, int hidden_dim);

  int input_dim() const { return static_cast<int>(wx.cols()); }
  int hidden_dim() const { return static_cast<int>(wh.cols()); }
  bool operator==(const LstmLayer &o) const { return wx == o.wx && wh == o.wh && b == o.b; }
};

/// Activations kept for backpropagation. Sequences are stored one frame per
/// column.
struct LstmTape {
  Mat x;      // I x T
  Mat gates;  // 4H x T, post-nonlinearity
  Mat c;      // H x T
  Mat h;      // H x T
};

LstmTape LstmForward(const LstmLayer &layer, const Mat &inputs);

struct LstmGrads {
  Mat wx, wh;
  Vec b;
};

/// BPTT through one layer. dh holds dLoss/dh_t for every frame; returns the
/// parameter gradients and writes dLoss/dx into *dx.
LstmGrads LstmBackward(const LstmLayer &layer, const LstmTape &tape, const Mat &dh, Mat *dx);

/// Keeps frames 1, 3, ..., 2*floor(T/2)-1 (1-based), i.e. columns 0, 2, ...
/// of a dim x T sequence. Output length is floor(T/2). Throws for T <= 1.
Mat Downsample(const Mat &seq);

/// Adjoint of Downsample: scatters a dim x floor(T/2) gradient back onto a
/// dim x T sequence, zeros on dropped frames.
Mat UpsampleGrad(const Mat &grad, Eigen::Index original_frames);

struct NetworkConfig {
  ModelMode mode = ModelMode::kWordCtc;
  int input_dim = 80;
  int hidden_dim = 500;
  int num_layers = 4;
  /// Halvings applied at num_layers + 1 positions: entry i < num_layers acts
  /// on the input of layer i, the last entry on the top layer's output.
  std::vector<int> reductions;

  int total_reductions() const;
  /// Frames at the output for an input of T frames: floor(T / 2^m).
  Eigen::Index OutputFrames(Eigen::Index input_frames) const;
};

/// Placement for a total down-sampling of 2^m: one halving after each of the
/// first min(m, L) layers, any excess stacked on the input.
std::vector<int> DownsamplePlan(int m, int num_layers);

/// Parses a rate reduction factor (1, 2, 4, ...) into m. Throws unless the
/// factor is a power of two.
int FactorToExponent(int factor);

struct NetworkGradients {
  std::vector<LstmGrads> layers;
  Mat w_out;
  Vec b_out;

  /// Views in the same order as Network::ParameterSpans.
  std::vector<std::span<double>> Spans();
};

/// LSTM stack plus a softmax head over vocabulary.output_dim() classes. For
/// CTC models the last class is the blank; for frame classifiers it is the
/// silence class.
class Network {
 public:
  Network() = default;
  /// Zero-filled parameters of the right shapes.
  Network(NetworkConfig config, Vocabulary vocab);

  /// Uniform(-0.05, 0.05) weights drawn in declaration order (per layer wx,
  /// wh row-major, then the output weights), forget-gate bias 1, other
  /// biases 0.
  static Network Random(NetworkConfig config, Vocabulary vocab, std::uint64_t seed);
  void InitRandom(std::uint64_t seed);

  const NetworkConfig &config() const { return config_; }
  ModelMode mode() const { return config_.mode; }
  const Vocabulary &vocab() const { return vocab_; }
  int output_dim() const { return static_cast<int>(vocab_.output_dim()); }
  int lookahead() const { return config_.mode == ModelMode::kFrameClassifier ? 1 : 0; }

  const std::vector<LstmLayer> &layers() const { return layers_; }
  const Mat &output_weights() const { return w_out_; }
  const Vec &output_bias() const { return b_out_; }

  LstmLayer &mutable_layer(std::size_t i);
  Mat &mutable_output_weights();
  Vec &mutable_output_bias();
  std::vector<std::span<double>> MutableParameterSpans();
  std::size_t ParameterCount() const;

  /// params -= scale * grads
  void ApplyGradients(NetworkGradients &grads, double scale);

  /// Changes on every mutation; tapes record it to detect staleness.
  std::uint64_t generation() const { return generation_; }

  NetworkGradients ZeroGradients() const;

  bool operator==(const Network &o) const;

 private:
  void Touch();

  NetworkConfig config_;
  Vocabulary vocab_;
  std::vector<LstmLayer> layers_;
  Mat w_out_;
  Vec b_out_;
  std::uint64_t generation_ = 0;
};

struct ForwardTape {
  std::uint64_t generation = 0;
  Eigen::Index input_frames = 0;
  bool padded = false;  // frame classifier: one zero frame appended
  /// Per layer: the sequence lengths before each halving at its input.
  std::vector<std::vector<Eigen::Index>> pre_lengths;
  std::vector<Eigen::Index> top_pre_lengths;
  std::vector<LstmTape> layers;
  Mat top;  // H x T' hidden states fed to the softmax
};

struct ForwardResult {
  /// T' x C log-probabilities (T' = T for frame classifiers, where row t is
  /// the prediction for frame t using inputs up to t + 1).
  Mat log_probs;
  ForwardTape tape;
};

/// features: T x d, one frame per row.
ForwardResult NetworkForward(const Network &net, const Mat &features);

/// Hidden states (H x T_n) of layer n (0-based) for the given input, used to
/// compare transferred layers.
Mat LayerOutput(const Network &net, const Mat &features, std::size_t layer);

struct BackwardResult {
  NetworkGradients params;
  Mat input_grads;  // T x d
};

/// output_grads: T' x C gradient with respect to the pre-softmax logits.
BackwardResult NetworkBackward(const Network &net, const ForwardTape &tape,
                               const Mat &output_grads);

/// Copies LSTM layers [0, k) of src into dst. dst keeps everything else; it
/// is expected to be freshly initialized. Requires k < dst layer count and
/// matching shapes.
void TransferBottomLayers(const Network &src, Network &dst, std::size_t k);

// Model file: "A2WMODEL" magic, u32 version, u32 mode, u32 layer count L,
// u32 input dim, u32 hidden dim, u32 output dim, u32 lookahead, L+1 u32
// reduction counts, u32 vocabulary size followed by (u32 length, bytes) per
// label, then f64 parameter blocks in declaration order (per layer wx, wh
// row-major and b; then output weights row-major and output bias). All
// integers and floats little-endian.
inline constexpr std::uint32_t kModelFormatVersion = 1;

void SaveModel(const Network &net, std::ostream &os);
Network LoadModel(std::istream &is);
void SaveModel(const Network &net, const std::string &path);
Network LoadModel(const std::string &path);

}  // namespace a2w

#endif  // A2W_NETWORK_HPP_
