#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fcnv/blocks.hpp"
#include "fcnv/train_eval.hpp"

using namespace fcnv;
using ad::Tape;
using ad::Var;

namespace {

Tensor random_tensor(Shape shape, Rng& rng) {
  Tensor t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-1.0, 1.0);
  return t;
}

Tensor probe(const Shape& shape) {
  Tensor w(shape);
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = 0.2 + 0.07 * static_cast<double>(i % 13) - 0.03 * static_cast<double>(i % 4);
  return w;
}

BlockConfig block_cfg(BlockVariant v, int c = 6, int k = 3, int b = 2) {
  BlockConfig cfg;
  cfg.variant = v;
  cfg.channels = c;
  cfg.kernel = k;
  cfg.bottleneck = (v == BlockVariant::kSeparableBottleneckGelu) ? b : 0;
  return cfg;
}

}  // namespace

TEST_CASE("variant names round-trip and list all four rungs") {
  const auto& vs = all_variants();
  REQUIRE(vs.size() == 4);
  std::set<std::string> names;
  for (BlockVariant v : vs) {
    names.insert(variant_name(v));
    CHECK(variant_from_name(variant_name(v)) == v);
  }
  CHECK(names.count("conv_glu") == 1);
  CHECK(names.count("conv_gelu") == 1);
  CHECK(names.count("separable_gelu") == 1);
  CHECK(names.count("separable_bottleneck_gelu") == 1);
  CHECK_THROWS_AS(variant_from_name("transformer"), ConfigError);
}

TEST_CASE("block config validation") {
  BlockConfig cfg = block_cfg(BlockVariant::kConvGelu);
  cfg.validate();

  cfg.channels = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = block_cfg(BlockVariant::kSeparableBottleneckGelu);
  cfg.bottleneck = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = block_cfg(BlockVariant::kConvGelu);
  cfg.dropout = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = block_cfg(BlockVariant::kConvGelu);
  cfg.padding = Padding::kNone;  // residual needs t' == t
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("init draws filters inside the fan-in bound, biases zero") {
  BlockConfig cfg = block_cfg(BlockVariant::kConvGelu, 64, 3);
  Rng rng(21);
  BlockWeights w = init_block_params(cfg, rng);
  const double bound = 0.1767766952966369;  // sqrt(6 / (64*3))
  REQUIRE(w.filters.size() > 0);
  double max_abs = 0.0;
  for (std::size_t i = 0; i < w.filters.size(); ++i)
    max_abs = std::max(max_abs, std::abs(w.filters[i]));
  CHECK(max_abs <= bound);
  CHECK(max_abs > 0.5 * bound);  // not suspiciously tiny
  for (std::size_t i = 0; i < w.bias.size(); ++i) CHECK(w.bias[i] == 0.0);
}

TEST_CASE("each variant keeps [c, t] shape and adds the residual") {
  Rng rng(3);
  for (BlockVariant v : all_variants()) {
    BlockConfig cfg = block_cfg(v);
    BlockParams p{cfg, init_block_params(cfg, rng)};
    Tensor x = random_tensor({6, 5}, rng);
    Tensor y = block_forward(x, p);
    REQUIRE(y.same_shape(x));
  }
}

TEST_CASE("zero weights reduce the block to the identity") {
  Rng rng(4);
  for (BlockVariant v : all_variants()) {
    BlockConfig cfg = block_cfg(v);
    BlockParams p{cfg, init_block_params(cfg, rng)};
    visit_block_params(cfg, p.weights, "z", [](const std::string&, Tensor& t) {
      for (std::size_t i = 0; i < t.size(); ++i) t[i] = 0.0;
    });
    Tensor x = random_tensor({6, 5}, rng);
    Tensor y = block_forward(x, p);
    // f(x) == 0 (GELU(0) = 0; GLU gate halves but 0 * sigmoid(0) = 0), so the
    // residual passes x straight through.
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == doctest::Approx(x[i]).epsilon(1e-12));
  }
}

TEST_CASE("visit names follow the variant's pipeline") {
  Rng rng(5);
  auto names_of = [&](BlockVariant v) {
    BlockConfig cfg = block_cfg(v);
    BlockWeights w = init_block_params(cfg, rng);
    std::vector<std::string> names;
    visit_block_params(cfg, w, "blk", [&](const std::string& n, Tensor&) { names.push_back(n); });
    return names;
  };
  CHECK(names_of(BlockVariant::kConvGlu) ==
        std::vector<std::string>{"blk.conv.w", "blk.conv.b"});
  CHECK(names_of(BlockVariant::kConvGelu) ==
        std::vector<std::string>{"blk.conv.w", "blk.conv.b"});
  CHECK(names_of(BlockVariant::kSeparableGelu) ==
        std::vector<std::string>{"blk.dw", "blk.pw.w", "blk.pw.b"});
  CHECK(names_of(BlockVariant::kSeparableBottleneckGelu) ==
        std::vector<std::string>{"blk.dw", "blk.down.w", "blk.up.w", "blk.up.b"});
}

TEST_CASE("glu block allocates 2c conv outputs") {
  Rng rng(6);
  BlockConfig cfg = block_cfg(BlockVariant::kConvGlu);
  BlockWeights w = init_block_params(cfg, rng);
  CHECK(w.filters.dim(0) == 12);  // 2c
  CHECK(w.bias.dim(0) == 12);

  BlockConfig gelu = block_cfg(BlockVariant::kConvGelu);
  BlockWeights wg = init_block_params(gelu, rng);
  CHECK(wg.filters.dim(0) == 6);
}

TEST_CASE("tape forward matches the pure forward") {
  Rng rng(7);
  for (BlockVariant v : all_variants()) {
    BlockConfig cfg = block_cfg(v);
    BlockParams p{cfg, init_block_params(cfg, rng)};
    Tensor x = random_tensor({6, 5}, rng);
    Tensor pure = block_forward(x, p);

    Tape tape;
    ad::Binder bind(tape);
    Var xv = tape.leaf(x);
    Var yv = block_forward(bind, xv, p, "blk", nullptr, false);
    const Tensor& taped = yv.value();
    REQUIRE(taped.same_shape(pure));
    for (std::size_t i = 0; i < pure.size(); ++i)
      CHECK(taped[i] == doctest::Approx(pure[i]).epsilon(1e-12));
  }
}

TEST_CASE("block gradients check out for every variant") {
  Rng rng(8);
  for (BlockVariant v : all_variants()) {
    BlockConfig cfg = block_cfg(v);
    BlockWeights init = init_block_params(cfg, rng);
    std::map<std::string, Tensor> params;
    visit_block_params(cfg, init, "blk", [&](const std::string& n, Tensor& t) {
      params.emplace(n, t);
    });
    Tensor x = random_tensor({6, 5}, rng);

    double err = grad_check(params, [&, cfg](Tape& t, const std::map<std::string, Tensor>& vals) {
      BlockParams p{cfg, BlockWeights{}};
      p.weights = init;
      visit_block_params(cfg, p.weights, "blk", [&](const std::string& n, Tensor& w) {
        w = vals.at(n);
      });
      ad::Binder bind(t);
      Var y = block_forward(bind, t.leaf(x), p, "blk", nullptr, false);
      return t.weighted_sum(y, probe({6, 5}));
    });
    CHECK(err < 1e-6);
  }
}

TEST_CASE("encoder stacks n blocks and keeps shape") {
  Rng rng(9);
  EncoderConfig cfg = EncoderConfig::uniform(BlockVariant::kSeparableBottleneckGelu, 3, 8, 3, 2);
  EncoderWeights w = init_params(cfg, rng);
  REQUIRE(w.size() == 3);
  Tensor x = random_tensor({8, 7}, rng);
  Tensor y = encoder_forward(x, cfg, w);
  CHECK(y.same_shape(x));

  // Names carry the block index.
  std::vector<std::string> names;
  visit_encoder_params(cfg, w, "enc", [&](const std::string& n, Tensor&) { names.push_back(n); });
  REQUIRE(names.size() == 12);
  CHECK(names.front() == "enc.0.dw");
  CHECK(names.back() == "enc.2.up.b");
}

TEST_CASE("encoder gradient through two stacked blocks") {
  Rng rng(10);
  EncoderConfig cfg = EncoderConfig::uniform(BlockVariant::kConvGelu, 2, 4, 3);
  EncoderWeights init = init_params(cfg, rng);
  std::map<std::string, Tensor> params;
  visit_encoder_params(cfg, init, "enc", [&](const std::string& n, Tensor& t) {
    params.emplace(n, t);
  });
  Tensor x = random_tensor({4, 6}, rng);

  double err = grad_check(params, [&](Tape& t, const std::map<std::string, Tensor>& vals) {
    EncoderWeights w = init;
    visit_encoder_params(cfg, w, "enc", [&](const std::string& n, Tensor& ten) {
      ten = vals.at(n);
    });
    ad::Binder bind(t);
    Var y = encoder_forward(bind, t.leaf(x), cfg, w, "enc", nullptr, false);
    return t.weighted_sum(y, probe({4, 6}));
  });
  CHECK(err < 1e-6);
}

TEST_CASE("conv encoder object exposes kind, causality and parameters") {
  Rng rng(11);
  EncoderConfig cfg = EncoderConfig::uniform(BlockVariant::kSeparableGelu, 2, 6, 3, 0, 0.0,
                                             Padding::kCausal);
  ConvEncoder enc(cfg, "enc", rng);
  CHECK(enc.channels() == 6);
  CHECK(enc.kind() == "separable_gelu");
  CHECK(enc.causal());

  std::size_t count = 0;
  enc.visit_params([&](const std::string&, Tensor&) { ++count; });
  CHECK(count == 6);  // 2 blocks x (dw, pw.w, pw.b)

  Tensor x = random_tensor({6, 9}, rng);
  Tensor y = enc.forward(x);
  CHECK(y.same_shape(x));

  // Rebuilding from extracted weights reproduces the forward bit-for-bit.
  ConvEncoder clone(cfg, "enc", enc.weights());
  Tensor y2 = clone.forward(x);
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == y2[i]);
}

TEST_CASE("training dropout perturbs the block output, inference never does") {
  Rng rng(12);
  BlockConfig cfg = block_cfg(BlockVariant::kConvGelu);
  cfg.dropout = 0.5;
  BlockParams p{cfg, init_block_params(cfg, rng)};
  Tensor x = random_tensor({6, 5}, rng);

  Tensor inference = block_forward(x, p, nullptr, false);
  Rng d1(100);
  Tensor train1 = block_forward(x, p, &d1, true);
  bool differs = false;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (inference[i] != train1[i]) differs = true;
  CHECK(differs);

  // Same seed, same mask.
  Rng d2(100);
  Tensor train2 = block_forward(x, p, &d2, true);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(train1[i] == train2[i]);
}
