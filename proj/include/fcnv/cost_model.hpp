#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fcnv/blocks.hpp"
#include "fcnv/task_config.hpp"

namespace fcnv {

// Operation counts are multiply-accumulates over filter taps; bias adds and
// activations are excluded (they are counted as parameters where learnable).
// t_next is the convolution's output length.

// Standard convolution, c in/out channels: c^2 * k * t_next.
std::uint64_t ops_standard(int c, int k, int t_next);
// Depthwise + pointwise: c*k*t_next + c^2*t_next.
std::uint64_t ops_separable(int c, int k, int t_next);
// Depthwise + bottlenecked pointwise pair: c*k*t_next + 2*b*c*t_next.
// Warns when 2b >= c (reduction no longer guaranteed).
std::uint64_t ops_bottleneck(int c, int k, int t_next, int b);
// Separable before grouping the depthwise stage: c^2*k*t_next + c^2*t_next.
std::uint64_t ops_unoptimized_separable(int c, int k, int t_next);

struct CostEntry {
  std::string layer;
  std::uint64_t ops = 0;
  std::uint64_t params = 0;
};

struct CostReport {
  std::string label;  // config description, e.g. "doc_class/conv_glu"
  std::vector<CostEntry> entries;
  std::string baseline_label;  // empty when no baseline attached
  std::uint64_t baseline_ops = 0;
  std::uint64_t baseline_params = 0;

  std::uint64_t total_ops() const;
  std::uint64_t total_params() const;
  // baseline / this; 0 when no baseline.
  double op_ratio() const;
  double param_ratio() const;

  std::string text() const;                       // aligned human table
  std::string kv(const std::string& prefix) const;  // canonical key<TAB>value lines
};

// "2.10 M"-style rendering with fixed two-decimal rounding.
std::string human_count(std::uint64_t n);

void set_baseline(CostReport& report, const CostReport& baseline);

// Per-layer tables at input length t (ops follow the actual padding
// geometry). The param-only views pass t = 0, zeroing the ops column.
CostReport cost_report(const EncoderConfig& cfg, int t);
CostReport cost_report(const NwpConfig& cfg, int t);
CostReport cost_report(const IntentSlotConfig& cfg, int t);
CostReport cost_report(const DocClassConfig& cfg, int t);

CostReport param_count(const EncoderConfig& cfg);
CostReport param_count(const NwpConfig& cfg);
CostReport param_count(const IntentSlotConfig& cfg);
CostReport param_count(const DocClassConfig& cfg);

}  // namespace fcnv
