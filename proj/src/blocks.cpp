#include "fcnv/blocks.hpp"

#include <cmath>
#include <utility>

namespace fcnv {

const char* variant_name(BlockVariant v) {
  switch (v) {
    case BlockVariant::kConvGlu: return "conv_glu";
    case BlockVariant::kConvGelu: return "conv_gelu";
    case BlockVariant::kSeparableGelu: return "separable_gelu";
    case BlockVariant::kSeparableBottleneckGelu: return "separable_bottleneck_gelu";
  }
  throw InternalError("unknown block variant");
}

BlockVariant variant_from_name(const std::string& name) {
  for (BlockVariant v : all_variants()) {
    if (name == variant_name(v)) return v;
  }
  throw ConfigError("unknown block variant '" + name +
                    "' (expected conv_glu, conv_gelu, separable_gelu, "
                    "separable_bottleneck_gelu)");
}

const std::vector<BlockVariant>& all_variants() {
  static const std::vector<BlockVariant> v{
      BlockVariant::kConvGlu, BlockVariant::kConvGelu, BlockVariant::kSeparableGelu,
      BlockVariant::kSeparableBottleneckGelu};
  return v;
}

void BlockConfig::validate() const {
  if (channels <= 0) throw ConfigError("block channels must be positive");
  if (kernel <= 0) throw ConfigError("block kernel must be positive");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("block dropout must be in [0, 1)");
  if (variant == BlockVariant::kSeparableBottleneckGelu) {
    if (bottleneck <= 0) throw ConfigError("bottleneck variant needs b >= 1");
    if (2 * bottleneck >= channels) {
      warn("bottleneck b=" + std::to_string(bottleneck) + " with c=" + std::to_string(channels) +
           ": 2b >= c, parameter reduction not guaranteed");
    }
  }
  if (padding == Padding::kNone || padding == Padding::kFull) {
    throw ConfigError("residual blocks need length-preserving padding (same or causal)");
  }
}

EncoderConfig EncoderConfig::uniform(BlockVariant v, int n_blocks, int channels, int kernel,
                                     int bottleneck, double dropout, Padding padding) {
  EncoderConfig cfg;
  cfg.n_blocks = n_blocks;
  cfg.block = BlockConfig{v, channels, kernel, bottleneck, dropout, padding};
  cfg.validate();
  return cfg;
}

void EncoderConfig::validate() const {
  if (n_blocks < 0) throw ConfigError("encoder n_blocks must be >= 0");
  block.validate();
}

namespace {

// Output channel count of the variant's convolution stage (GLU halves it back).
int conv_out_channels(const BlockConfig& cfg) {
  return cfg.variant == BlockVariant::kConvGlu ? 2 * cfg.channels : cfg.channels;
}

Tensor uniform_filled(Shape shape, double bound, Rng& rng) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-bound, bound);
  return t;
}

}  // namespace

void visit_block_params(const BlockConfig& cfg, BlockWeights& w, const std::string& prefix,
                        const ParamVisitor& f) {
  switch (cfg.variant) {
    case BlockVariant::kConvGlu:
    case BlockVariant::kConvGelu:
      f(prefix + ".conv.w", w.filters);
      f(prefix + ".conv.b", w.bias);
      break;
    case BlockVariant::kSeparableGelu:
      f(prefix + ".dw", w.depthwise);
      f(prefix + ".pw.w", w.pointwise);
      f(prefix + ".pw.b", w.bias);
      break;
    case BlockVariant::kSeparableBottleneckGelu:
      f(prefix + ".dw", w.depthwise);
      f(prefix + ".down.w", w.down);
      f(prefix + ".up.w", w.up);
      f(prefix + ".up.b", w.bias);
      break;
  }
}

void visit_encoder_params(const EncoderConfig& cfg, EncoderWeights& w, const std::string& prefix,
                          const ParamVisitor& f) {
  if (static_cast<int>(w.size()) != cfg.n_blocks) {
    throw InternalError("encoder has " + std::to_string(w.size()) + " weight sets for " +
                        std::to_string(cfg.n_blocks) + " blocks");
  }
  for (int i = 0; i < cfg.n_blocks; ++i) {
    visit_block_params(cfg.block, w[static_cast<std::size_t>(i)],
                       prefix + "." + std::to_string(i), f);
  }
}

BlockWeights init_block_params(const BlockConfig& cfg, Rng& rng) {
  cfg.validate();
  const int c = cfg.channels, k = cfg.kernel, b = cfg.bottleneck;
  BlockWeights w;
  switch (cfg.variant) {
    case BlockVariant::kConvGlu:
    case BlockVariant::kConvGelu: {
      const int out = conv_out_channels(cfg);
      w.filters = uniform_filled({out, c, k}, std::sqrt(6.0 / (c * k)), rng);
      w.bias = Tensor({out});
      break;
    }
    case BlockVariant::kSeparableGelu:
      w.depthwise = uniform_filled({c, k}, std::sqrt(6.0 / k), rng);
      w.pointwise = uniform_filled({c, c}, std::sqrt(6.0 / c), rng);
      w.bias = Tensor({c});
      break;
    case BlockVariant::kSeparableBottleneckGelu:
      w.depthwise = uniform_filled({c, k}, std::sqrt(6.0 / k), rng);
      w.down = uniform_filled({b, c}, std::sqrt(6.0 / c), rng);
      w.up = uniform_filled({c, b}, std::sqrt(6.0 / b), rng);
      w.bias = Tensor({c});
      break;
  }
  return w;
}

EncoderWeights init_params(const EncoderConfig& cfg, Rng& rng) {
  cfg.validate();
  EncoderWeights w;
  w.reserve(static_cast<std::size_t>(cfg.n_blocks));
  for (int i = 0; i < cfg.n_blocks; ++i) w.push_back(init_block_params(cfg.block, rng));
  return w;
}

Tensor block_forward(const Tensor& x, const BlockParams& params, Rng* rng, bool training) {
  const BlockConfig& cfg = params.config;
  const BlockWeights& w = params.weights;
  if (x.rank() != 2 || x.dim(0) != cfg.channels) {
    throw ShapeError("block expects [" + std::to_string(cfg.channels) + ", t] input, got " +
                     shape_str(x.shape()));
  }

  Tensor h = x;
  if (training && cfg.dropout > 0.0) {
    if (rng == nullptr) throw ConfigError("training with dropout needs an rng");
    h = dropout(h, cfg.dropout, *rng, true).output;
  }

  switch (cfg.variant) {
    case BlockVariant::kConvGlu: {
      ConvSpec spec{cfg.channels, 2 * cfg.channels, cfg.kernel, 1, 1, cfg.padding};
      h = conv1d(h, ConvParams{spec, w.filters, w.bias});
      h = activate(h, ActivationKind::glu());
      break;
    }
    case BlockVariant::kConvGelu: {
      ConvSpec spec{cfg.channels, cfg.channels, cfg.kernel, 1, 1, cfg.padding};
      h = conv1d(h, ConvParams{spec, w.filters, w.bias});
      h = activate(h, ActivationKind::gelu());
      break;
    }
    case BlockVariant::kSeparableGelu:
      h = depthwise_conv1d(h, w.depthwise, cfg.padding);
      h = pointwise_conv1d(h, w.pointwise, &w.bias);
      h = activate(h, ActivationKind::gelu());
      break;
    case BlockVariant::kSeparableBottleneckGelu:
      h = depthwise_conv1d(h, w.depthwise, cfg.padding);
      h = pointwise_conv1d(h, w.down, nullptr);
      h = pointwise_conv1d(h, w.up, &w.bias);
      h = activate(h, ActivationKind::gelu());
      break;
  }

  if (!h.same_shape(x)) {
    throw InternalError("residual branch shaped " + shape_str(h.shape()) +
                        " but input is " + shape_str(x.shape()));
  }
  return add(x, h);
}

Tensor encoder_forward(const Tensor& x, const EncoderConfig& cfg, const EncoderWeights& weights,
                       Rng* rng, bool training) {
  if (static_cast<int>(weights.size()) != cfg.n_blocks) {
    throw InternalError("encoder has " + std::to_string(weights.size()) + " weight sets for " +
                        std::to_string(cfg.n_blocks) + " blocks");
  }
  Tensor h = x;
  for (int i = 0; i < cfg.n_blocks; ++i) {
    try {
      h = block_forward(h, BlockParams{cfg.block, weights[static_cast<std::size_t>(i)]}, rng,
                        training);
    } catch (const Error& e) {
      throw ShapeError("block " + std::to_string(i) + ": " + e.what());
    }
  }
  return h;
}

ad::Var block_forward(ad::Binder& bind, ad::Var x, const BlockParams& params,
                      const std::string& prefix, Rng* rng, bool training) {
  const BlockConfig& cfg = params.config;
  const BlockWeights& w = params.weights;
  ad::Tape& tape = bind.tape();

  ad::Var h = x;
  if (training && cfg.dropout > 0.0) {
    if (rng == nullptr) throw ConfigError("training with dropout needs an rng");
    h = tape.dropout(h, cfg.dropout, *rng, true);
  }

  switch (cfg.variant) {
    case BlockVariant::kConvGlu: {
      ConvSpec spec{cfg.channels, 2 * cfg.channels, cfg.kernel, 1, 1, cfg.padding};
      h = tape.conv1d(h, bind(prefix + ".conv.w", w.filters), bind(prefix + ".conv.b", w.bias),
                      spec);
      h = tape.activate(h, ActivationKind::glu());
      break;
    }
    case BlockVariant::kConvGelu: {
      ConvSpec spec{cfg.channels, cfg.channels, cfg.kernel, 1, 1, cfg.padding};
      h = tape.conv1d(h, bind(prefix + ".conv.w", w.filters), bind(prefix + ".conv.b", w.bias),
                      spec);
      h = tape.activate(h, ActivationKind::gelu());
      break;
    }
    case BlockVariant::kSeparableGelu:
      h = tape.depthwise_conv1d(h, bind(prefix + ".dw", w.depthwise), cfg.padding);
      h = tape.pointwise_conv1d(h, bind(prefix + ".pw.w", w.pointwise),
                                bind(prefix + ".pw.b", w.bias));
      h = tape.activate(h, ActivationKind::gelu());
      break;
    case BlockVariant::kSeparableBottleneckGelu:
      h = tape.depthwise_conv1d(h, bind(prefix + ".dw", w.depthwise), cfg.padding);
      h = tape.pointwise_conv1d(h, bind(prefix + ".down.w", w.down), std::nullopt);
      h = tape.pointwise_conv1d(h, bind(prefix + ".up.w", w.up), bind(prefix + ".up.b", w.bias));
      h = tape.activate(h, ActivationKind::gelu());
      break;
  }
  return tape.add(x, h);
}

ad::Var encoder_forward(ad::Binder& bind, ad::Var x, const EncoderConfig& cfg,
                        const EncoderWeights& weights, const std::string& prefix, Rng* rng,
                        bool training) {
  if (static_cast<int>(weights.size()) != cfg.n_blocks) {
    throw InternalError("encoder has " + std::to_string(weights.size()) + " weight sets for " +
                        std::to_string(cfg.n_blocks) + " blocks");
  }
  ad::Var h = x;
  for (int i = 0; i < cfg.n_blocks; ++i) {
    h = block_forward(bind, h, BlockParams{cfg.block, weights[static_cast<std::size_t>(i)]},
                      prefix + "." + std::to_string(i), rng, training);
  }
  return h;
}

ConvEncoder::ConvEncoder(EncoderConfig cfg, std::string prefix, Rng& rng)
    : cfg_(std::move(cfg)), prefix_(std::move(prefix)) {
  weights_ = init_params(cfg_, rng);
}

ConvEncoder::ConvEncoder(EncoderConfig cfg, std::string prefix, EncoderWeights weights)
    : cfg_(std::move(cfg)), prefix_(std::move(prefix)), weights_(std::move(weights)) {
  cfg_.validate();
}

Tensor ConvEncoder::forward(const Tensor& x) const {
  return encoder_forward(x, cfg_, weights_);
}

ad::Var ConvEncoder::forward_on(ad::Binder& bind, ad::Var x, Rng* rng, bool training) const {
  return encoder_forward(bind, x, cfg_, weights_, prefix_, rng, training);
}

void ConvEncoder::visit_params(const ParamVisitor& f) {
  visit_encoder_params(cfg_, weights_, prefix_, f);
}

}  // namespace fcnv
