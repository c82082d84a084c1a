#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "fcnv/dataset.hpp"
#include "fcnv/train_eval.hpp"

using namespace fcnv;
using ad::Tape;
using ad::Var;

namespace {

ReprConfig conv_repr(int c, int n, Padding padding, ReprKind kind, int b = 0) {
  ReprConfig r;
  r.kind = kind;
  r.channels = c;
  r.n_blocks = n;
  r.kernel = 3;
  r.bottleneck = b;
  r.padding = padding;
  return r;
}

template <typename Model>
void zero_all(Model& m) {
  m.visit_params([](const std::string&, Tensor& t) {
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = 0.0;
  });
}

}  // namespace

TEST_CASE("sgd subtracts lr * grad") {
  Sgd opt(1.0);
  Tensor p({2}, {1.0, -2.0});
  Tensor g({2}, {0.25, 0.5});
  opt.step("w", p, g);
  CHECK(p[0] == 0.75);
  CHECK(p[1] == -2.5);

  Sgd half(0.5);
  half.step("w", p, g);
  CHECK(p[0] == doctest::Approx(0.625));
}

TEST_CASE("adam first step matches the closed form") {
  Adam opt(0.01);
  Tensor p({1}, {0.0});
  Tensor g({1}, {3.0});
  opt.step("w", p, g);
  CHECK(p[0] == doctest::Approx(-0.009999999966666666).epsilon(1e-15));
}

TEST_CASE("adam keeps separate state per parameter name") {
  Adam opt(0.01);
  Tensor pa({1}, {0.0});
  Tensor pb({1}, {0.0});
  Tensor g({1}, {3.0});
  opt.step("a", pa, g);
  opt.step("a", pa, g);
  // "b" starts fresh: its first step must equal "a"'s first step.
  opt.step("b", pb, g);
  CHECK(pb[0] == doctest::Approx(-0.009999999966666666).epsilon(1e-15));
  CHECK(pa[0] < pb[0]);  // two steps moved further

  // Reusing a name with a different shape is a wiring bug, not a silent
  // reset of the moment estimates.
  Tensor wrong({2});
  CHECK_THROWS_AS(opt.step("a", wrong, Tensor({2})), InternalError);
}

TEST_CASE("zero gradients leave parameters untouched") {
  Adam adam(0.1);
  Sgd sgd(0.1);
  Tensor p({3}, {1.0, 2.0, 3.0});
  Tensor z({3});
  adam.step("w", p, z);
  sgd.step("w", p, z);
  CHECK(p[0] == 1.0);
  CHECK(p[1] == 2.0);
  CHECK(p[2] == 3.0);
}

TEST_CASE("apply_grads matches by name and flags strays") {
  std::map<std::string, Tensor> params{{"w", Tensor({2}, {1.0, 1.0})},
                                       {"b", Tensor({1}, {5.0})}};
  auto walk = [&](const ParamVisitor& f) {
    for (auto& [n, t] : params) f(n, t);
  };

  Sgd opt(1.0);
  apply_grads(opt, {{"w", Tensor({2}, {0.5, -0.5})}}, walk);
  CHECK(params.at("w")[0] == 0.5);
  CHECK(params.at("w")[1] == 1.5);
  CHECK(params.at("b")[0] == 5.0);  // no gradient, no move

  CHECK_THROWS_AS(apply_grads(opt, {{"nope", Tensor({1})}}, walk), InternalError);
}

TEST_CASE("accumulate_grads sums with scale and inserts new keys") {
  std::map<std::string, Tensor> acc;
  accumulate_grads(acc, {{"w", Tensor({2}, {1.0, 2.0})}}, 0.5);
  accumulate_grads(acc, {{"w", Tensor({2}, {1.0, 0.0})}, {"b", Tensor({1}, {4.0})}}, 0.25);
  CHECK(acc.at("w")[0] == doctest::Approx(0.75));
  CHECK(acc.at("w")[1] == doctest::Approx(1.0));
  CHECK(acc.at("b")[0] == doctest::Approx(1.0));
}

TEST_CASE("cross_entropy_value fixtures") {
  CHECK(cross_entropy_value(Tensor({1, 4}), {0}) ==
        doctest::Approx(1.3862943611198906).epsilon(1e-12));

  // Confident correct prediction: near-zero loss.
  Tensor conf({1, 3}, {20.0, 0.0, 0.0});
  CHECK(cross_entropy_value(conf, {0}) < 1e-8);

  // Max-stabilized: huge logits must not overflow.
  Tensor big({2, 2}, {1000.0, 0.0, 0.0, 1000.0});
  double v = cross_entropy_value(big, {0, 1});
  CHECK(std::isfinite(v));
  CHECK(v < 1e-8);
  CHECK(cross_entropy_value(big, {1, 1}) == doctest::Approx(500.0).epsilon(1e-9));

  CHECK_THROWS_AS(cross_entropy_value(Tensor({2, 2}), {0}), ShapeError);
  CHECK_THROWS_AS(cross_entropy_value(Tensor({1, 2}), {2}), IndexError);
}

TEST_CASE("grad_check validates a correct gradient and flags a broken one") {
  Rng rng(1);
  Tensor w({3, 2});
  Tensor x({2, 3});
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.uniform(-1, 1);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(-1, 1);

  std::map<std::string, Tensor> params{{"w", w}};
  double good = grad_check(params, [&](Tape& t, const std::map<std::string, Tensor>& v) {
    Var logits = t.matmul(t.leaf(x), t.leaf(v.at("w"), "w"));  // [2, 2]
    return t.cross_entropy(logits, {0, 1});
  });
  CHECK(good < 1e-7);

  // Deliberately wrong pullback (scaled by 1.1): the checker must notice.
  double bad = grad_check(params, [&](Tape& t, const std::map<std::string, Tensor>& v) {
    Var w_leaf = t.leaf(v.at("w"), "w");
    Var broken = t.custom(w_leaf.value(), {w_leaf}, [](Tape& tt, int self) {
      Tensor g = tt.grad_of(self);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= 1.1;
      tt.accumulate(tt.parents_of(self)[0], g);
    });
    Var logits = t.matmul(t.leaf(x), broken);
    return t.cross_entropy(logits, {0, 1});
  });
  CHECK(bad > 1e-3);
}

TEST_CASE("frozen-model mean losses hit the uniform-logits closed form") {
  Rng rng(2);
  {
    NwpConfig cfg;
    cfg.vocab = 6;
    cfg.embed_dim = 4;
    cfg.rank = 2;
    cfg.repr = conv_repr(4, 1, Padding::kCausal, ReprKind::kConvGelu);
    NwpModel m(cfg, rng);
    zero_all(m);
    NwpDataset data;
    data.vocab = {"a", "b", "c", "d", "e", "f"};
    data.lines = {{0, 1, 2}, {3, 4}};
    CHECK(mean_loss_nwp(m, data) == doctest::Approx(std::log(6.0)).epsilon(1e-12));
  }
  {
    IntentSlotConfig cfg;
    cfg.char_vocab = 4;
    cfg.char_dim = 3;
    cfg.char_cnn_dim = 6;
    cfg.gaz_vocab = 2;
    cfg.gaz_dim = 2;
    cfg.n_intents = 3;
    cfg.n_slots = 5;
    cfg.intent_tower = conv_repr(8, 1, Padding::kSame, ReprKind::kConvGelu);
    cfg.slot_tower = cfg.intent_tower;
    IntentSlotModel m(cfg, rng);
    zero_all(m);
    IntentSlotDataset data;
    IntentSlotSample s;
    s.input.word_chars = {{1, 2}, {3}};
    s.input.gazetteer = {{}, {0}};
    s.intent = 1;
    s.slots = {0, 4};
    data.samples = {s};
    CHECK(mean_loss_intent_slot(m, data) ==
          doctest::Approx(std::log(3.0) + std::log(5.0)).epsilon(1e-12));
  }
  {
    DocClassConfig cfg;
    cfg.embed_dim = 4;
    cfg.repr = conv_repr(4, 1, Padding::kSame, ReprKind::kConvGelu);
    DocClassModel m(cfg, rng);
    zero_all(m);
    DocClassDataset data;
    data.docs = {{{1, 2, 3}, 0}, {{9, 8}, 1}};
    CHECK(mean_loss_doc_class(m, data) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }
}

TEST_CASE("training drives the doc-class loss well below its start") {
  Rng gen(7);
  DocClassDataset data = synth_doc_class(gen, 60);

  Rng init(11);
  DocClassConfig cfg;
  cfg.embed_dim = 16;
  cfg.repr = conv_repr(16, 1, Padding::kSame, ReprKind::kSeparableBottleneckGelu, 4);
  DocClassModel m(cfg, init);

  TrainOptions opts;
  opts.epochs = 1000;  // capped by max_steps
  opts.batch = 8;
  opts.lr = 2e-3;
  opts.adam = true;
  opts.max_steps = 200;
  opts.seed = 3;
  int epochs_seen = 0;
  opts.on_epoch = [&](int, double) { ++epochs_seen; };

  TrainStats stats = train_doc_class(m, data, opts);
  CHECK(stats.steps == 200);
  CHECK(epochs_seen > 0);
  CHECK(stats.initial_loss > 0.1);
  CHECK(stats.final_loss < 0.5 * stats.initial_loss);
  CHECK(stats.final_loss == doctest::Approx(mean_loss_doc_class(m, data)).epsilon(1e-12));
}

TEST_CASE("training is bit-reproducible for a fixed seed") {
  Rng gen(17);
  NwpDataset data = synth_nwp(gen, 12, 8);

  auto run = [&]() {
    Rng init(5);
    NwpConfig cfg;
    cfg.vocab = 200;
    cfg.embed_dim = 8;
    cfg.rank = 4;
    cfg.repr = conv_repr(8, 1, Padding::kCausal, ReprKind::kSeparableBottleneckGelu, 2);
    NwpModel m(cfg, init);
    TrainOptions opts;
    opts.epochs = 2;
    opts.batch = 4;
    opts.lr = 1e-3;
    opts.seed = 9;
    return train_nwp(m, data, opts);
  };
  TrainStats a = run();
  TrainStats b = run();
  CHECK(a.initial_loss == b.initial_loss);
  CHECK(a.final_loss == b.final_loss);
  CHECK(a.steps == b.steps);
  CHECK(a.final_loss < a.initial_loss);
}

TEST_CASE("intent-slot training reduces the joint loss") {
  Rng gen(23);
  IntentSlotDataset data = synth_intent_slot(gen, 40);
  REQUIRE(!data.samples.empty());

  Rng init(29);
  IntentSlotConfig cfg;
  cfg.char_vocab = 40;
  cfg.char_dim = 6;
  cfg.char_cnn_dim = 12;
  cfg.gaz_vocab = 6;
  cfg.gaz_dim = 4;
  cfg.n_intents = static_cast<int>(data.intents.size());
  cfg.n_slots = static_cast<int>(data.slot_tags.size());
  cfg.intent_tower = conv_repr(16, 1, Padding::kSame, ReprKind::kSeparableBottleneckGelu, 4);
  cfg.slot_tower = cfg.intent_tower;
  IntentSlotModel m(cfg, init);

  TrainOptions opts;
  opts.epochs = 3;
  opts.batch = 8;
  opts.lr = 2e-3;
  opts.seed = 1;
  TrainStats stats = train_intent_slot(m, data, opts);
  CHECK(stats.final_loss < stats.initial_loss);
}
