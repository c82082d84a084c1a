#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "fcnv/artifact.hpp"

namespace fcnv {

struct LatencyStats {
  double median_ms = 0.0;
  double p95_ms = 0.0;
  int runs = 0;
  int warmups = 0;
  int batch = 1;  // >1 when sub-ms calls were auto-batched per timed sample
};

// Single-threaded wall-clock timing of fn. Enforces runs >= 50 and
// warmups >= 5 (clamped up with a warning). Calls shorter than ~1 ms are
// grouped into batches whose total time is divided by the batch size.
LatencyStats measure_latency(const std::function<void()>& fn, int runs = 50, int warmups = 5);

// Tensor-buffer high-water mark of one fn() call, measured above the bytes
// already live when the call starts (the standing weights).
std::uint64_t transient_peak_bytes(const std::function<void()>& fn);

struct BenchResult {
  std::uint64_t file_size_bytes = 0;
  LatencyStats latency;
  std::uint64_t weight_bytes = 0;     // deployed 32-bit weights: 4 * param_count
  std::uint64_t transient_bytes = 0;  // extra tensor bytes during one forward

  // The memory metric: resident weights plus the inference high-water mark.
  std::uint64_t peak_tensor_bytes() const { return weight_bytes + transient_bytes; }
};

// One forward pass over a fixed, task-appropriate input of length input_len;
// the closure owns the input, so repeated calls repeat the same inference.
std::function<void()> fixed_inference(AnyModel& m, int input_len);

// Runs fixed_inference through the latency/memory harness. file_size_bytes
// is computed from the artifact encoding (no write).
BenchResult bench_model(AnyModel& m, int input_len, int runs);

// The reference input lengths used when --input-len is not given.
int default_input_len(TaskKind task);

}  // namespace fcnv
