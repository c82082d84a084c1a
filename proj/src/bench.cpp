#include "fcnv/bench.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <vector>

#include "fcnv/dataset.hpp"
#include "fcnv/errors.hpp"

namespace fcnv {

namespace {

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

}  // namespace

LatencyStats measure_latency(const std::function<void()>& fn, int runs, int warmups) {
  LatencyStats st;
  if (runs < 50) {
    warn("latency: runs clamped up to the minimum of 50");
    runs = 50;
  }
  if (warmups < 5) warmups = 5;
  st.runs = runs;
  st.warmups = warmups;

  for (int i = 0; i < warmups; ++i) fn();

  // One calibration call decides whether sub-ms work needs batching to sit
  // well above timer resolution; batched samples divide by the batch size.
  const double t0 = now_ms();
  fn();
  const double est = now_ms() - t0;
  int batch = 1;
  if (est < 1.0)
    batch = std::min(10000, std::max(1, static_cast<int>(std::ceil(2.0 / std::max(est, 2e-4)))));
  st.batch = batch;

  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(runs));
  for (int i = 0; i < runs; ++i) {
    const double a = now_ms();
    for (int k = 0; k < batch; ++k) fn();
    samples.push_back((now_ms() - a) / batch);
  }
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  st.median_ms = n % 2 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
  const auto idx = std::min(n - 1, static_cast<std::size_t>(std::ceil(0.95 * n)) - 1);
  st.p95_ms = samples[idx];
  return st;
}

std::uint64_t transient_peak_bytes(const std::function<void()>& fn) {
  memtrack::reset_peak();
  const std::size_t before = memtrack::current_bytes();
  fn();
  const std::size_t peak = memtrack::peak_bytes();
  return peak > before ? static_cast<std::uint64_t>(peak - before) : 0;
}

int default_input_len(TaskKind task) {
  switch (task) {
    case TaskKind::kNwp:
      return 16;  // tokens
    case TaskKind::kIntentSlot:
      return 12;  // tokens
    case TaskKind::kDocClass:
      return 512;  // bytes
  }
  throw InternalError("default_input_len: bad task");
}

std::function<void()> fixed_inference(AnyModel& m, int input_len) {
  if (input_len <= 0) throw ConfigError("bench: input length must be positive");

  std::function<void()> run;
  if (m.nwp) {
    const int v = m.nwp->config().vocab;
    std::vector<int> tokens(static_cast<std::size_t>(input_len));
    for (int i = 0; i < input_len; ++i) tokens[static_cast<std::size_t>(i)] = (i * 37 + 11) % v;
    run = [&model = *m.nwp, tokens] { model.next_logits_all(tokens); };
  } else if (m.intent_slot) {
    static const std::array<const char*, 8> kWords = {
        "alarm", "play", "call", "seven", "paris", "music", "timer", "hello"};
    const int gaz_vocab = m.intent_slot->config().gaz_vocab;
    IntentSlotInput input;
    for (int i = 0; i < input_len; ++i) {
      input.word_chars.push_back(encode_chars(kWords[static_cast<std::size_t>(i) % kWords.size()]));
      std::vector<int> gaz;
      if (i % 2 == 0) gaz.push_back(i % gaz_vocab);
      input.gazetteer.push_back(std::move(gaz));
    }
    run = [&model = *m.intent_slot, input] { model.forward(input); };
  } else if (m.doc_class) {
    std::vector<int> bytes(static_cast<std::size_t>(input_len));
    for (int i = 0; i < input_len; ++i) bytes[static_cast<std::size_t>(i)] = (i * 31 + 7) % 256;
    run = [&model = *m.doc_class, bytes] { model.forward(bytes); };
  } else {
    throw InternalError("fixed_inference: empty model");
  }
  return run;
}

BenchResult bench_model(AnyModel& m, int input_len, int runs) {
  const std::function<void()> run = fixed_inference(m, input_len);
  BenchResult r;
  r.file_size_bytes = artifact_size_bytes(artifact_from_model(m));
  r.weight_bytes = 4 * m.param_count();
  r.transient_bytes = transient_peak_bytes(run);
  r.latency = measure_latency(run, runs);
  return r;
}

}  // namespace fcnv
