#pragma once

#include <optional>
#include <vector>

#include "fcnv/tensor.hpp"

namespace fcnv {

// Convolutions use the correlation convention (no kernel flip), like every
// NN framework. Same-centered padding keeps t'==t at stride 1; causal
// padding shifts the whole kernel into the past for language modeling;
// full padding (k-1 on both sides) is what the char-CNN uses so that even
// single-character words produce a valid window.
enum class Padding { kSame, kCausal, kNone, kFull };

const char* padding_name(Padding p);
Padding padding_from_name(const std::string& name);

struct ConvSpec {
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 0;
  int groups = 1;
  int stride = 1;
  Padding padding = Padding::kSame;

  bool depthwise() const { return groups == in_channels; }
  int pad_left() const;
  int pad_right() const;
  // Output length for an input of length t; throws ShapeError when < 1.
  int out_len(int t) const;
  void validate() const;
};

// Filters are shaped [out, in/groups, kernel]; bias, when present, [out].
struct ConvParams {
  ConvSpec spec;
  Tensor filters;
  std::optional<Tensor> bias;

  void validate() const;
};

// A pointwise convolution factored into down (c -> b) and up (b -> c)
// projections. Warns when 2b >= c since the factorization then stops
// saving parameters.
struct BottleneckParams {
  ConvParams down;
  ConvParams up;
  int bottleneck = 0;

  void validate() const;
};

enum class Act { kRelu, kLeakyRelu, kElu, kGelu, kSigmoid, kGlu };

struct ActivationKind {
  Act act = Act::kRelu;
  double leaky_slope = 0.01;
  double elu_alpha = 1.0;

  static ActivationKind relu() { return {Act::kRelu}; }
  static ActivationKind leaky_relu(double slope = 0.01) { return {Act::kLeakyRelu, slope}; }
  static ActivationKind elu(double alpha = 1.0) { return {Act::kElu, 0.01, alpha}; }
  static ActivationKind gelu() { return {Act::kGelu}; }
  static ActivationKind sigmoid() { return {Act::kSigmoid}; }
  static ActivationKind glu() { return {Act::kGlu}; }
};

enum class PoolKind { kMax, kAvg };

// --- forward ---

// Grouped 1-D convolution of x [c, t] -> [out, t']. Each output channel
// correlates the input channels of its group with its kernels and adds
// bias. groups == c is the depthwise configuration.
Tensor conv1d(const Tensor& x, const ConvParams& params);

// One kernel per channel: output channel j is the correlation of input
// channel j with kernels row j. Identical to conv1d with g == c.
Tensor depthwise_conv1d(const Tensor& x, const Tensor& kernels, Padding padding);

// Per-timestep linear map across channels: y = w * x (+ bias per row).
Tensor pointwise_conv1d(const Tensor& x, const Tensor& w, const Tensor* bias = nullptr);

// up(down(x)): project c channels down to b, then back up to c.
Tensor bottleneck_pointwise(const Tensor& x, const BottleneckParams& params);

// Elementwise activations; GELU is the exact erf form x * Phi(x). GLU
// splits the channel axis in half and returns first_half * sigmoid(gate),
// so the output has half the input channels (rank-2 input required).
Tensor activate(const Tensor& x, const ActivationKind& kind);

// Per-channel reduction over time: [c, t] -> [c].
Tensor pool_time(const Tensor& x, PoolKind kind);
// Max variant that also reports the winning time index per channel
// (earliest index wins ties, which is also the gradient convention).
Tensor pool_time_max_argmax(const Tensor& x, std::vector<int>* argmax);

// Row gather: [V, d] table, ids in [0, V) -> [len, d].
Tensor embedding_lookup(const Tensor& table, const std::vector<int>& ids);

// Affine map on row vectors: x [n, d] * w [d, m] + bias [m].
Tensor linear(const Tensor& x, const Tensor& w, const Tensor* bias = nullptr);

// --- paired gradient rules ---

struct ConvGrads {
  Tensor x;
  Tensor filters;
  std::optional<Tensor> bias;
};

ConvGrads conv1d_backward(const Tensor& x, const ConvParams& params, const Tensor& grad_out);

struct DepthwiseGrads {
  Tensor x;
  Tensor kernels;
};

DepthwiseGrads depthwise_conv1d_backward(const Tensor& x, const Tensor& kernels, Padding padding,
                                         const Tensor& grad_out);

ConvGrads pointwise_conv1d_backward(const Tensor& x, const Tensor& w, bool has_bias,
                                    const Tensor& grad_out);

// d activate(x) applied to grad_out. For GLU, x is the full pre-activation
// (2h channels) and grad_out has h channels.
Tensor activate_backward(const Tensor& x, const ActivationKind& kind, const Tensor& grad_out);

// Max routes the gradient to the (earliest) argmax; avg spreads it.
Tensor pool_time_backward(const Tensor& x, PoolKind kind, const Tensor& grad_out);

// Scatter-add of output-row gradients into a [V, d] table gradient.
Tensor embedding_lookup_backward(int vocab, int dim, const std::vector<int>& ids,
                                 const Tensor& grad_out);

struct LinearGrads {
  Tensor x;
  Tensor w;
  std::optional<Tensor> bias;
};

LinearGrads linear_backward(const Tensor& x, const Tensor& w, bool has_bias,
                            const Tensor& grad_out);

// Scalar helpers shared by forward and backward paths.
double gelu_scalar(double x);
double gelu_grad_scalar(double x);
double sigmoid_scalar(double x);

}  // namespace fcnv
