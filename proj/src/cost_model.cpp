#include "fcnv/cost_model.hpp"

#include <algorithm>
#include <cstdio>
#include <initializer_list>
#include <utility>

namespace fcnv {

namespace {

std::uint64_t u64(int v) { return static_cast<std::uint64_t>(v); }

void require_positive(std::initializer_list<std::pair<const char*, int>> args) {
  for (const auto& [name, v] : args) {
    if (v <= 0) {
      throw ConfigError(std::string("cost model: ") + name + " must be positive, got " +
                        std::to_string(v));
    }
  }
}

}  // namespace

std::uint64_t ops_standard(int c, int k, int t_next) {
  require_positive({{"c", c}, {"k", k}, {"t_next", t_next}});
  return u64(c) * u64(c) * u64(k) * u64(t_next);
}

std::uint64_t ops_separable(int c, int k, int t_next) {
  require_positive({{"c", c}, {"k", k}, {"t_next", t_next}});
  return u64(c) * u64(k) * u64(t_next) + u64(c) * u64(c) * u64(t_next);
}

std::uint64_t ops_bottleneck(int c, int k, int t_next, int b) {
  require_positive({{"c", c}, {"k", k}, {"t_next", t_next}, {"b", b}});
  if (2 * b >= c) {
    warn("ops_bottleneck: 2b >= c (b=" + std::to_string(b) + ", c=" + std::to_string(c) +
         "), operation reduction not guaranteed");
  }
  return u64(c) * u64(k) * u64(t_next) + 2 * u64(b) * u64(c) * u64(t_next);
}

std::uint64_t ops_unoptimized_separable(int c, int k, int t_next) {
  require_positive({{"c", c}, {"k", k}, {"t_next", t_next}});
  return u64(c) * u64(c) * u64(k) * u64(t_next) + u64(c) * u64(c) * u64(t_next);
}

std::uint64_t CostReport::total_ops() const {
  std::uint64_t sum = 0;
  for (const CostEntry& e : entries) sum += e.ops;
  return sum;
}

std::uint64_t CostReport::total_params() const {
  std::uint64_t sum = 0;
  for (const CostEntry& e : entries) sum += e.params;
  return sum;
}

double CostReport::op_ratio() const {
  if (baseline_label.empty() || total_ops() == 0) return 0.0;
  return static_cast<double>(baseline_ops) / static_cast<double>(total_ops());
}

double CostReport::param_ratio() const {
  if (baseline_label.empty() || total_params() == 0) return 0.0;
  return static_cast<double>(baseline_params) / static_cast<double>(total_params());
}

std::string human_count(std::uint64_t n) {
  char buf[32];
  if (n < 1000) {
    std::snprintf(buf, sizeof(buf), "%llu", static_cast<unsigned long long>(n));
  } else if (n < 1000000ULL) {
    std::snprintf(buf, sizeof(buf), "%.2f K", static_cast<double>(n) / 1e3);
  } else if (n < 1000000000ULL) {
    std::snprintf(buf, sizeof(buf), "%.2f M", static_cast<double>(n) / 1e6);
  } else {
    std::snprintf(buf, sizeof(buf), "%.2f G", static_cast<double>(n) / 1e9);
  }
  return buf;
}

std::string CostReport::text() const {
  std::size_t name_w = 5;
  for (const CostEntry& e : entries) name_w = std::max(name_w, e.layer.size());

  std::string out;
  char line[256];
  if (!label.empty()) out += "# " + label + "\n";
  out += "# ops = multiply-accumulates over filter taps; bias adds and activations excluded\n";
  std::snprintf(line, sizeof(line), "%-*s  %14s  %10s  %14s  %10s\n", static_cast<int>(name_w),
                "layer", "params", "", "ops", "");
  out += line;
  for (const CostEntry& e : entries) {
    std::snprintf(line, sizeof(line), "%-*s  %14llu  %10s  %14llu  %10s\n",
                  static_cast<int>(name_w), e.layer.c_str(),
                  static_cast<unsigned long long>(e.params), human_count(e.params).c_str(),
                  static_cast<unsigned long long>(e.ops), human_count(e.ops).c_str());
    out += line;
  }
  std::snprintf(line, sizeof(line), "%-*s  %14llu  %10s  %14llu  %10s\n",
                static_cast<int>(name_w), "TOTAL",
                static_cast<unsigned long long>(total_params()),
                human_count(total_params()).c_str(), static_cast<unsigned long long>(total_ops()),
                human_count(total_ops()).c_str());
  out += line;
  if (!baseline_label.empty()) {
    std::snprintf(line, sizeof(line), "vs %s: params %.2fx smaller, ops %.2fx fewer\n",
                  baseline_label.c_str(), param_ratio(), op_ratio());
    out += line;
  }
  return out;
}

std::string CostReport::kv(const std::string& prefix) const {
  std::string out;
  char line[256];
  for (const CostEntry& e : entries) {
    std::string name = e.layer;
    for (char& ch : name) {
      if (ch == ' ' || ch == '\t') ch = '_';
    }
    std::snprintf(line, sizeof(line), "%s.layer.%s.params\t%llu\n", prefix.c_str(), name.c_str(),
                  static_cast<unsigned long long>(e.params));
    out += line;
    std::snprintf(line, sizeof(line), "%s.layer.%s.ops\t%llu\n", prefix.c_str(), name.c_str(),
                  static_cast<unsigned long long>(e.ops));
    out += line;
  }
  std::snprintf(line, sizeof(line), "%s.total_params\t%llu\n", prefix.c_str(),
                static_cast<unsigned long long>(total_params()));
  out += line;
  std::snprintf(line, sizeof(line), "%s.total_ops\t%llu\n", prefix.c_str(),
                static_cast<unsigned long long>(total_ops()));
  out += line;
  if (!baseline_label.empty()) {
    std::snprintf(line, sizeof(line), "%s.baseline\t%s\n", prefix.c_str(),
                  baseline_label.c_str());
    out += line;
    std::snprintf(line, sizeof(line), "%s.param_ratio\t%.6f\n", prefix.c_str(), param_ratio());
    out += line;
    std::snprintf(line, sizeof(line), "%s.op_ratio\t%.6f\n", prefix.c_str(), op_ratio());
    out += line;
  }
  return out;
}

void set_baseline(CostReport& report, const CostReport& baseline) {
  report.baseline_label = baseline.label.empty() ? "baseline" : baseline.label;
  report.baseline_ops = baseline.total_ops();
  report.baseline_params = baseline.total_params();
}

namespace {

std::uint64_t block_params(const BlockConfig& b) {
  const std::uint64_t c = u64(b.channels), k = u64(b.kernel), bb = u64(b.bottleneck);
  switch (b.variant) {
    case BlockVariant::kConvGlu: return 2 * c * c * k + 2 * c;
    case BlockVariant::kConvGelu: return c * c * k + c;
    case BlockVariant::kSeparableGelu: return c * k + c * c + c;
    case BlockVariant::kSeparableBottleneckGelu: return c * k + 2 * bb * c + c;
  }
  throw InternalError("unknown block variant");
}

std::uint64_t block_ops(const BlockConfig& b, int t) {
  if (t <= 0) return 0;
  // Output length from the actual padding geometry (t'==t for same/causal
  // at stride 1, but derived, not assumed).
  ConvSpec spec{b.channels, b.channels, b.kernel, 1, 1, b.padding};
  const int tn = spec.out_len(t);
  switch (b.variant) {
    case BlockVariant::kConvGlu: return 2 * ops_standard(b.channels, b.kernel, tn);
    case BlockVariant::kConvGelu: return ops_standard(b.channels, b.kernel, tn);
    case BlockVariant::kSeparableGelu: return ops_separable(b.channels, b.kernel, tn);
    case BlockVariant::kSeparableBottleneckGelu:
      return ops_bottleneck(b.channels, b.kernel, tn, b.bottleneck);
  }
  throw InternalError("unknown block variant");
}

std::uint64_t lstm_params(int in, int h) { return 4 * (u64(in) * u64(h) + u64(h) * u64(h) + u64(h)); }
std::uint64_t lstm_ops_per_step(int in, int h) { return 4 * (u64(in) * u64(h) + u64(h) * u64(h)); }

void append_repr(CostReport& report, const ReprConfig& repr, const std::string& prefix, int t) {
  if (repr.is_recurrent()) {
    CostEntry e;
    e.layer = prefix + ".lstm";
    if (repr.padding == Padding::kCausal) {
      e.params = lstm_params(repr.channels, repr.channels);
      e.ops = t > 0 ? u64(t) * lstm_ops_per_step(repr.channels, repr.channels) : 0;
    } else {
      const int h = repr.channels / 2;
      e.params = 2 * lstm_params(repr.channels, h);
      e.ops = t > 0 ? 2 * u64(t) * lstm_ops_per_step(repr.channels, h) : 0;
    }
    report.entries.push_back(std::move(e));
    return;
  }
  const EncoderConfig enc = repr.encoder();
  for (int i = 0; i < enc.n_blocks; ++i) {
    report.entries.push_back(CostEntry{prefix + ".block." + std::to_string(i),
                                       block_ops(enc.block, t), block_params(enc.block)});
  }
}

// Documented assumption for the char-CNN's per-word cost: the ops column
// prices a 6-character word (full padding makes the conv output length
// chars + width - 1).
constexpr int kCostModelWordLen = 6;

}  // namespace

CostReport cost_report(const EncoderConfig& cfg, int t) {
  cfg.validate();
  CostReport r;
  r.label = std::string("encoder/") + variant_name(cfg.block.variant);
  for (int i = 0; i < cfg.n_blocks; ++i) {
    r.entries.push_back(
        CostEntry{"block." + std::to_string(i), block_ops(cfg.block, t), block_params(cfg.block)});
  }
  return r;
}

CostReport cost_report(const NwpConfig& cfg, int t) {
  cfg.validate();
  const std::uint64_t V = u64(cfg.vocab), d = u64(cfg.embed_dim), rk = u64(cfg.rank);
  CostReport r;
  r.label = std::string("nwp/") + repr_name(cfg.repr.kind);
  // Factors multiply out to W_e each forward pass: V*r*d MACs.
  r.entries.push_back(CostEntry{"embedding.factors", t > 0 ? V * rk * d : 0, V * rk + rk * d});
  r.entries.push_back(CostEntry{"embedding.bos", 0, d});
  append_repr(r, cfg.repr, "repr", t);
  // Decoder reuses the embedding factors (tied): no new parameters.
  r.entries.push_back(CostEntry{"decoder.tied", t > 0 ? u64(t) * d * V : 0, 0});
  return r;
}

CostReport cost_report(const IntentSlotConfig& cfg, int t) {
  cfg.validate();
  CostReport r;
  r.label = std::string("intent_slot/") + repr_name(cfg.intent_tower.kind);
  r.entries.push_back(CostEntry{"char_cnn.embed", 0, u64(cfg.char_vocab) * u64(cfg.char_dim)});
  const std::uint64_t per_width = u64(cfg.char_cnn_dim / 3);
  std::uint64_t conv_params = 0, conv_ops = 0;
  for (int w : kCharCnnWidths) {
    conv_params += per_width * u64(cfg.char_dim) * u64(w) + per_width;
    if (t > 0) {
      conv_ops +=
          u64(t) * per_width * u64(cfg.char_dim) * u64(w) * u64(kCostModelWordLen + w - 1);
    }
  }
  r.entries.push_back(CostEntry{"char_cnn.conv", conv_ops, conv_params});
  r.entries.push_back(CostEntry{"gazetteer.embed", 0, u64(cfg.gaz_vocab) * u64(cfg.gaz_dim)});
  append_repr(r, cfg.intent_tower, "intent_tower", t);
  append_repr(r, cfg.slot_tower, "slot_tower", t);
  const std::uint64_t c = u64(cfg.word_dim());
  r.entries.push_back(CostEntry{"head.intent", t > 0 ? c * u64(cfg.n_intents) : 0,
                                c * u64(cfg.n_intents) + u64(cfg.n_intents)});
  r.entries.push_back(CostEntry{"head.slot", t > 0 ? u64(t) * c * u64(cfg.n_slots) : 0,
                                c * u64(cfg.n_slots) + u64(cfg.n_slots)});
  return r;
}

CostReport cost_report(const DocClassConfig& cfg, int t) {
  cfg.validate();
  const std::uint64_t d = u64(cfg.embed_dim);
  CostReport r;
  r.label = std::string("doc_class/") + repr_name(cfg.repr.kind);
  r.entries.push_back(CostEntry{"embed", 0, u64(DocClassConfig::kByteVocab) * d});
  append_repr(r, cfg.repr, "repr", t);
  r.entries.push_back(CostEntry{"head", t > 0 ? d * u64(cfg.classes) : 0,
                                d * u64(cfg.classes) + u64(cfg.classes)});
  return r;
}

CostReport param_count(const EncoderConfig& cfg) { return cost_report(cfg, 0); }
CostReport param_count(const NwpConfig& cfg) { return cost_report(cfg, 0); }
CostReport param_count(const IntentSlotConfig& cfg) { return cost_report(cfg, 0); }
CostReport param_count(const DocClassConfig& cfg) { return cost_report(cfg, 0); }

}  // namespace fcnv
