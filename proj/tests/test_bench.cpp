#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <string>
#include <thread>
#include <vector>

#include "fcnv/bench.hpp"
#include "fcnv/errors.hpp"

using namespace fcnv;

namespace {

ReprConfig tiny_repr(ReprKind kind, int channels, Padding padding, int bottleneck = 0) {
  ReprConfig r;
  r.kind = kind;
  r.channels = channels;
  r.n_blocks = 1;
  r.kernel = 3;
  r.bottleneck = bottleneck;
  r.padding = padding;
  return r;
}

AnyModel tiny_nwp() {
  NwpConfig cfg;
  cfg.vocab = 7;
  cfg.embed_dim = 6;
  cfg.rank = 3;
  cfg.repr = tiny_repr(ReprKind::kConvGelu, 6, Padding::kCausal);
  Rng rng(21);
  AnyModel m;
  m.nwp = std::make_unique<NwpModel>(cfg, rng);
  return m;
}

AnyModel tiny_intent_slot() {
  IntentSlotConfig cfg;
  cfg.char_vocab = 39;
  cfg.char_dim = 3;
  cfg.char_cnn_dim = 6;
  cfg.gaz_vocab = 3;
  cfg.gaz_dim = 2;
  cfg.n_intents = 3;
  cfg.n_slots = 4;
  cfg.intent_tower = tiny_repr(ReprKind::kConvGelu, 8, Padding::kSame);
  cfg.slot_tower = cfg.intent_tower;
  Rng rng(22);
  AnyModel m;
  m.intent_slot = std::make_unique<IntentSlotModel>(cfg, rng);
  return m;
}

AnyModel tiny_doc_class() {
  DocClassConfig cfg;
  cfg.embed_dim = 8;
  cfg.repr = tiny_repr(ReprKind::kConvGelu, 8, Padding::kSame);
  Rng rng(23);
  AnyModel m;
  m.doc_class = std::make_unique<DocClassModel>(cfg, rng);
  return m;
}

}  // namespace

TEST_CASE("latency of a 10 ms sleep lands on 10 ms") {
  const auto stub = [] { std::this_thread::sleep_for(std::chrono::milliseconds(10)); };

  std::vector<std::string> warnings;
  set_warning_handler([&](const std::string& m) { warnings.push_back(m); });
  LatencyStats st = measure_latency(stub, 7, 1);  // below both minimums
  set_warning_handler({});

  CHECK(st.runs == 50);
  CHECK(st.warmups == 5);
  CHECK(st.batch == 1);  // well above timer resolution, no batching
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("clamped") != std::string::npos);

  CHECK(st.median_ms >= 10.0);
  CHECK(st.median_ms < 13.0);
  CHECK(st.p95_ms >= st.median_ms);
}

TEST_CASE("sub-millisecond work is auto-batched") {
  volatile int sink = 0;
  LatencyStats st = measure_latency([&] { sink = sink + 1; }, 50, 5);
  CHECK(st.batch > 1);
  CHECK(st.batch <= 10000);
  CHECK(st.median_ms >= 0.0);
  CHECK(st.median_ms < 1.0);  // per-call estimate, not per-batch
}

TEST_CASE("transient peak counts tensor bytes above the standing baseline") {
  CHECK(transient_peak_bytes([] {}) == 0);

  CHECK(transient_peak_bytes([] { Tensor t = Tensor::zeros({1000}); }) == 8000);

  // Sequential scopes: the high-water mark is the larger, not the sum.
  CHECK(transient_peak_bytes([] {
          { Tensor a = Tensor::zeros({1000}); }
          { Tensor b = Tensor::zeros({2000}); }
        }) == 16000);
  CHECK(transient_peak_bytes([] {
          Tensor a = Tensor::zeros({1000});
          Tensor b = Tensor::zeros({2000});
        }) == 24000);

  // Weights live before the call don't count against the transient.
  Tensor standing = Tensor::zeros({5000});
  CHECK(standing.size() == 5000);
  CHECK(transient_peak_bytes([] { Tensor t = Tensor::zeros({1000}); }) == 8000);
}

TEST_CASE("fixed inference closures cover all three tasks") {
  AnyModel nwp = tiny_nwp();
  AnyModel is = tiny_intent_slot();
  AnyModel dc = tiny_doc_class();
  for (AnyModel* m : {&nwp, &is, &dc}) {
    auto run = fixed_inference(*m, 9);
    run();
    run();  // closure owns its input; repeatable
  }
  CHECK_THROWS_AS(fixed_inference(nwp, 0), ConfigError);
  CHECK_THROWS_AS(fixed_inference(nwp, -3), ConfigError);
}

TEST_CASE("default input lengths per task") {
  CHECK(default_input_len(TaskKind::kNwp) == 16);
  CHECK(default_input_len(TaskKind::kIntentSlot) == 12);
  CHECK(default_input_len(TaskKind::kDocClass) == 512);
}

TEST_CASE("bench_model fills every field consistently") {
  AnyModel m = tiny_doc_class();
  BenchResult r = bench_model(m, 16, 50);
  CHECK(r.weight_bytes == 4 * m.param_count());
  CHECK(r.file_size_bytes == artifact_size_bytes(artifact_from_model(m)));
  CHECK(r.file_size_bytes > r.weight_bytes);  // framing + header on top
  CHECK(r.transient_bytes > 0);
  CHECK(r.latency.runs == 50);
  CHECK(r.latency.median_ms > 0.0);
  CHECK(r.peak_tensor_bytes() == r.weight_bytes + r.transient_bytes);
}

TEST_CASE("bottlenecked encoder has the smaller inference high-water mark") {
  // GLU blocks widen to 2c inside the residual; bottleneck blocks narrow to b.
  Rng rng(31);
  auto glu = make_representation(tiny_repr(ReprKind::kConvGlu, 64, Padding::kSame), "g", rng);
  auto bneck = make_representation(
      tiny_repr(ReprKind::kSeparableBottleneckGelu, 64, Padding::kSame, 8), "b", rng);

  Tensor x = Tensor::zeros({64, 32});
  const std::uint64_t glu_peak = transient_peak_bytes([&] { glu->forward(x); });
  const std::uint64_t bneck_peak = transient_peak_bytes([&] { bneck->forward(x); });
  CHECK(bneck_peak > 0);
  CHECK(bneck_peak < glu_peak);
}
