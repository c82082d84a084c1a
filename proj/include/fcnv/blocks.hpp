#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fcnv/autodiff.hpp"
#include "fcnv/nn_ops.hpp"
#include "fcnv/tensor.hpp"

namespace fcnv {

// The ablation ladder: each step removes parameters/operations from the one
// before it (gated conv baseline -> plain conv + GELU -> depthwise-separable
// -> separable with a bottlenecked pointwise pair).
enum class BlockVariant { kConvGlu, kConvGelu, kSeparableGelu, kSeparableBottleneckGelu };

const char* variant_name(BlockVariant v);
BlockVariant variant_from_name(const std::string& name);
const std::vector<BlockVariant>& all_variants();

struct BlockConfig {
  BlockVariant variant = BlockVariant::kConvGelu;
  int channels = 0;    // c; input == output channels
  int kernel = 0;      // k
  int bottleneck = 0;  // b; bottleneck variant only
  double dropout = 0.0;
  Padding padding = Padding::kSame;

  void validate() const;
};

// Which tensors are live depends on the variant:
//   conv variants:      filters [out, c, k] + bias [out] (out = 2c for GLU)
//   separable_gelu:     depthwise [c, k] + pointwise [c, c] + bias [c]
//   separable_bottleneck_gelu: depthwise [c, k] + down [b, c] + up [c, b] + bias [c]
struct BlockWeights {
  Tensor filters;
  Tensor depthwise;
  Tensor pointwise;
  Tensor down;
  Tensor up;
  Tensor bias;
};

struct BlockParams {
  BlockConfig config;
  BlockWeights weights;
};

// Homogeneous stack: every block shares (variant, c, k, b, p, padding), so
// the residual chain is well-formed by construction.
struct EncoderConfig {
  int n_blocks = 0;
  BlockConfig block;

  static EncoderConfig uniform(BlockVariant v, int n_blocks, int channels, int kernel,
                               int bottleneck = 0, double dropout = 0.0,
                               Padding padding = Padding::kSame);

  int channels() const { return block.channels; }
  void validate() const;
};

using EncoderWeights = std::vector<BlockWeights>;

using ParamVisitor = std::function<void(const std::string&, Tensor&)>;

// Enumerates the variant's live tensors in pipeline order with stable names
// (prefix + ".conv.w", ".dw", ".pw.w", ".down.w", ".up.w", ".conv.b"/".pw.b"/".up.b").
void visit_block_params(const BlockConfig& cfg, BlockWeights& w, const std::string& prefix,
                        const ParamVisitor& f);
void visit_encoder_params(const EncoderConfig& cfg, EncoderWeights& w, const std::string& prefix,
                          const ParamVisitor& f);

// Kaiming fan-in uniform (±sqrt(6/fan_in)) filters, zero biases.
BlockWeights init_block_params(const BlockConfig& cfg, Rng& rng);
EncoderWeights init_params(const EncoderConfig& cfg, Rng& rng);

// x + f(dropout(x)) with f = the variant's conv pipeline then activation.
// rng required only when training with dropout > 0.
Tensor block_forward(const Tensor& x, const BlockParams& params, Rng* rng = nullptr,
                     bool training = false);
Tensor encoder_forward(const Tensor& x, const EncoderConfig& cfg, const EncoderWeights& weights,
                       Rng* rng = nullptr, bool training = false);

// Tape twins for training; parameters bind through `bind` under `prefix`, so
// gradients come back keyed by the same names visit_*_params emits.
ad::Var block_forward(ad::Binder& bind, ad::Var x, const BlockParams& params,
                      const std::string& prefix, Rng* rng, bool training);
ad::Var encoder_forward(ad::Binder& bind, ad::Var x, const EncoderConfig& cfg,
                        const EncoderWeights& weights, const std::string& prefix, Rng* rng,
                        bool training);

// A sequence representation: maps a [c_in, t] feature map to [channels(), t].
// The task models hold one (or two) of these behind this interface so the
// conv ladder rows and the recurrent baseline swap freely.
class Representation {
 public:
  virtual ~Representation() = default;

  virtual int channels() const = 0;
  virtual std::string kind() const = 0;
  // True when outputs at time t depend only on inputs at times <= t.
  virtual bool causal() const = 0;

  virtual Tensor forward(const Tensor& x) const = 0;
  virtual ad::Var forward_on(ad::Binder& bind, ad::Var x, Rng* rng, bool training) const = 0;
  virtual void visit_params(const ParamVisitor& f) = 0;
};

class ConvEncoder : public Representation {
 public:
  ConvEncoder(EncoderConfig cfg, std::string prefix, Rng& rng);
  ConvEncoder(EncoderConfig cfg, std::string prefix, EncoderWeights weights);

  const EncoderConfig& config() const { return cfg_; }
  EncoderWeights& weights() { return weights_; }

  int channels() const override { return cfg_.channels(); }
  std::string kind() const override { return variant_name(cfg_.block.variant); }
  bool causal() const override { return cfg_.block.padding == Padding::kCausal; }

  Tensor forward(const Tensor& x) const override;
  ad::Var forward_on(ad::Binder& bind, ad::Var x, Rng* rng, bool training) const override;
  void visit_params(const ParamVisitor& f) override;

 private:
  EncoderConfig cfg_;
  std::string prefix_;
  EncoderWeights weights_;
};

}  // namespace fcnv
