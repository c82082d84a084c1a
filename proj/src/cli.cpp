#include "fcnv/cli.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fcnv/artifact.hpp"
#include "fcnv/bench.hpp"
#include "fcnv/config.hpp"
#include "fcnv/cost_model.hpp"
#include "fcnv/dataset.hpp"
#include "fcnv/errors.hpp"
#include "fcnv/metrics.hpp"
#include "fcnv/train_eval.hpp"

namespace fcnv {

namespace {

void kv(const std::string& key, const std::string& value) {
  std::printf("%s\t%s\n", key.c_str(), value.c_str());
}

void kv(const std::string& key, std::uint64_t value) {
  std::printf("%s\t%" PRIu64 "\n", key.c_str(), value);
}

void kv(const std::string& key, double value) {
  std::printf("%s\t%.6f\n", key.c_str(), value);
}

// --- built-in desk-scale defaults (used when no --config is given) ---------

std::map<std::string, std::string> desk_config_kv(TaskKind task) {
  std::map<std::string, std::string> m;
  m["task"] = task_name(task);
  m["encoder.variant"] = "separable_bottleneck_gelu";
  m["encoder.k"] = "3";
  m["encoder.dropout"] = "0";
  switch (task) {
    case TaskKind::kNwp:
      m["nwp.vocab"] = "200";
      m["nwp.rank"] = "32";
      m["encoder.c"] = "64";
      m["encoder.n"] = "2";
      m["encoder.b"] = "16";
      m["encoder.padding"] = "causal";
      break;
    case TaskKind::kIntentSlot:
      m["encoder.c"] = "32";  // char_cnn_dim 24 + gaz_dim 8
      m["encoder.n"] = "1";
      m["encoder.b"] = "8";
      break;
    case TaskKind::kDocClass:
      m["encoder.c"] = "32";
      m["encoder.n"] = "2";
      m["encoder.b"] = "8";
      break;
  }
  return m;
}

// Builds the working config from --config / --task; exactly one model spec.
Config cli_config(const std::string& config_path, const std::string& task_flag) {
  if (!config_path.empty()) {
    Config cfg = Config::parse_file(config_path);
    if (!task_flag.empty()) {
      const std::string file_task = cfg.get_string("task");
      if (file_task != task_flag)
        throw ConfigError("--task " + task_flag + " conflicts with task=" + file_task +
                          " in " + config_path);
    }
    return cfg;
  }
  if (task_flag.empty()) throw ConfigError("pass --config <file> or --task <name>");
  return Config::from_map(desk_config_kv(task_from_name(task_flag)), "<built-in defaults>");
}

TrainOptions train_options_from(Config& cfg, TaskKind task, std::uint64_t seed) {
  TrainOptions o;
  switch (task) {
    case TaskKind::kNwp:
      o.epochs = 10;
      o.batch = 4;
      o.lr = 1e-3;
      break;
    case TaskKind::kIntentSlot:
      o.epochs = 8;
      o.batch = 8;
      o.lr = 2e-3;
      break;
    case TaskKind::kDocClass:
      o.epochs = 6;
      o.batch = 8;
      o.lr = 2e-3;
      break;
  }
  o.epochs = cfg.get_int("train.epochs", o.epochs);
  o.batch = cfg.get_int("train.batch", o.batch);
  o.lr = cfg.get_double("train.lr", o.lr);
  o.max_steps = cfg.get_int("train.max_steps", 0);
  const std::string opt = cfg.get_string("train.optimizer", "adam");
  if (opt == "adam")
    o.adam = true;
  else if (opt == "sgd")
    o.adam = false;
  else
    throw ConfigError("train.optimizer must be \"adam\" or \"sgd\", got \"" + opt + "\"");
  o.seed = seed;
  o.on_epoch = [](int epoch, double loss) {
    std::fprintf(stderr, "epoch %d  mean train loss %.4f\n", epoch + 1, loss);
  };
  return o;
}

struct SynthSizes {
  int train = 0, eval = 0, len = 16;
};

SynthSizes synth_sizes_from(Config& cfg, TaskKind task) {
  SynthSizes s;
  switch (task) {
    case TaskKind::kNwp:
      s.train = 1200;
      s.eval = 240;
      break;
    case TaskKind::kIntentSlot:
      s.train = 600;
      s.eval = 150;
      break;
    case TaskKind::kDocClass:
      s.train = 240;
      s.eval = 80;
      break;
  }
  s.train = cfg.get_int("synth.train", s.train);
  s.eval = cfg.get_int("synth.eval", s.eval);
  s.len = cfg.get_int("synth.len", s.len);
  return s;
}

// Synthetic train/eval splits; the derivation depends only on (task, seed,
// sizes) so `eval --synthetic --seed S` rebuilds exactly what train saw.
struct TaskData {
  NwpDataset nwp_train, nwp_eval;
  IntentSlotDataset is_train, is_eval;
  DocClassDataset dc_train, dc_eval;
  bool has_analytic = false;  // synthetic NWP: analytic e^H available
  double analytic_ppl = 0.0;
};

TaskData make_synth_data(TaskKind task, std::uint64_t seed, const SynthSizes& sizes) {
  Rng root(seed);
  Rng train_gen = root.split();
  Rng eval_gen = root.split();
  TaskData d;
  switch (task) {
    case TaskKind::kNwp:
      d.nwp_train = synth_nwp(train_gen, sizes.train, sizes.len);
      d.nwp_eval = synth_nwp(eval_gen, sizes.eval, sizes.len);
      d.has_analytic = true;
      d.analytic_ppl = std::exp(synth_nwp_entropy(sizes.len));
      break;
    case TaskKind::kIntentSlot:
      d.is_train = synth_intent_slot(train_gen, sizes.train);
      d.is_eval = synth_intent_slot(eval_gen, sizes.eval);
      break;
    case TaskKind::kDocClass:
      d.dc_train = synth_doc_class(train_gen, sizes.train);
      d.dc_eval = synth_doc_class(eval_gen, sizes.eval);
      break;
  }
  return d;
}

TaskData load_file_data(TaskKind task, Config& cfg) {
  TaskData d;
  switch (task) {
    case TaskKind::kNwp: {
      const std::string vocab = cfg.get_string("data.vocab");
      d.nwp_train = load_nwp_corpus(cfg.get_string("data.corpus"), vocab);
      if (cfg.has("data.eval_corpus"))
        d.nwp_eval = load_nwp_corpus(cfg.get_string("data.eval_corpus"), vocab);
      else
        d.nwp_eval = d.nwp_train;
      break;
    }
    case TaskKind::kIntentSlot:
      d.is_train = load_intent_slot(cfg.get_string("data.train"));
      d.is_eval = cfg.has("data.eval") ? load_intent_slot(cfg.get_string("data.eval"))
                                       : d.is_train;
      break;
    case TaskKind::kDocClass:
      d.dc_train = load_doc_class(cfg.get_string("data.train"));
      d.dc_eval = cfg.has("data.eval") ? load_doc_class(cfg.get_string("data.eval"))
                                       : d.dc_train;
      break;
  }
  return d;
}

TaskData gather_data(TaskKind task, Config& cfg, bool synthetic, std::uint64_t seed) {
  if (synthetic) {
    cfg.allow_unused_prefix("data.");
    return make_synth_data(task, seed, synth_sizes_from(cfg, task));
  }
  cfg.allow_unused_prefix("synth.");
  if (!cfg.has("data.corpus") && !cfg.has("data.train"))
    throw ConfigError("no data source: pass --synthetic or set data.* keys in the config");
  return load_file_data(task, cfg);
}

// Config/dataset consistency checks at the train boundary.
void check_dims(const AnyModel& m, const TaskData& d) {
  if (m.nwp) {
    const int v = m.nwp->config().vocab;
    const int have = static_cast<int>(d.nwp_train.vocab.size());
    if (v != have)
      throw ConfigError("nwp.vocab=" + std::to_string(v) + " but the corpus vocab has " +
                        std::to_string(have) + " entries");
  } else if (m.intent_slot) {
    const auto& c = m.intent_slot->config();
    const auto need_intents = static_cast<int>(d.is_train.intents.size());
    const auto need_slots = static_cast<int>(d.is_train.slot_tags.size());
    const auto need_gaz = static_cast<int>(d.is_train.gaz_tags.size());
    if (need_intents > c.n_intents || need_slots > c.n_slots || need_gaz > c.gaz_vocab)
      throw ConfigError("intent_slot dims too small for the dataset (" +
                        std::to_string(need_intents) + " intents, " +
                        std::to_string(need_slots) + " slot tags, " +
                        std::to_string(need_gaz) + " gazetteer tags)");
  }
}

// metrics-facing adapter
class NwpScorer : public NextTokenModel {
 public:
  explicit NwpScorer(const NwpModel& m) : m_(&m) {}
  int vocab() const override { return m_->config().vocab; }
  Tensor next_logits_all(const std::vector<int>& tokens) const override {
    return m_->next_logits_all(tokens);
  }

 private:
  const NwpModel* m_;
};

int argmax1(const Tensor& t) {
  int best = 0;
  for (std::size_t i = 1; i < t.size(); ++i)
    if (t[i] > t[best]) best = static_cast<int>(i);
  return best;
}

void eval_and_print(AnyModel& m, const TaskData& d) {
  if (m.nwp) {
    const NwpScorer scorer(*m.nwp);
    if (static_cast<int>(d.nwp_eval.vocab.size()) != scorer.vocab())
      throw ConfigError("artifact vocab " + std::to_string(scorer.vocab()) +
                        " does not match the evaluation corpus vocab");
    const MetricResult ppl = perplexity(scorer, d.nwp_eval.lines);
    const MetricResult wpr = word_prediction_rate(scorer, d.nwp_eval.lines);
    const MetricResult ks =
        keystroke_savings(scorer, d.nwp_eval.word_lines, d.nwp_eval.vocab, d.nwp_eval.unk_id);
    kv("eval.ppl", ppl.value);
    kv("eval.wpr", wpr.value);
    kv("eval.ks", ks.value);
    kv("eval.tokens", ppl.support);
    if (!d.nwp_train.lines.empty())
      kv("eval.unigram_ppl", unigram_ppl(d.nwp_train, d.nwp_eval));
    if (d.has_analytic) kv("eval.analytic_ppl", d.analytic_ppl);
    std::fprintf(stderr, "ppl %.3f   ks %.2f%%   wpr %.2f%%   (%" PRIu64 " tokens)\n",
                 ppl.value, ks.value, wpr.value, ppl.support);
  } else if (m.intent_slot) {
    const auto& cfg = m.intent_slot->config();
    std::vector<int> ipred, igold, spred, sgold;
    for (const auto& s : d.is_eval.samples) {
      const IntentSlotLogits out = m.intent_slot->forward(s.input);
      ipred.push_back(argmax1(out.intent));
      igold.push_back(s.intent);
      for (std::size_t t = 0; t < s.slots.size(); ++t) {
        spred.push_back(argmax_row(out.slots, static_cast<int>(t)));
        sgold.push_back(s.slots[t]);
      }
    }
    const MetricResult fi = micro_f1(ipred, igold, cfg.n_intents, "intent_f1");
    const MetricResult fs = micro_f1(spred, sgold, cfg.n_slots, "slot_f1");
    const MetricResult acc = accuracy(ipred, igold, "intent_accuracy");
    kv("eval.intent_f1", fi.value * 100.0);
    kv("eval.slot_f1", fs.value * 100.0);
    kv("eval.intent_accuracy", acc.value * 100.0);
    kv("eval.utterances", fi.support);
    kv("eval.tokens", fs.support);
    std::fprintf(stderr, "intent F1 %.2f%%   slot F1 %.2f%%   (%" PRIu64 " utterances)\n",
                 fi.value * 100.0, fs.value * 100.0, fi.support);
  } else {
    std::vector<int> pred, gold;
    for (const auto& doc : d.dc_eval.docs) {
      pred.push_back(argmax1(m.doc_class->forward(doc.bytes)));
      gold.push_back(doc.label);
    }
    const MetricResult acc = accuracy(pred, gold);
    const MetricResult f1 = micro_f1(pred, gold, m.doc_class->config().classes);
    kv("eval.accuracy", acc.value * 100.0);
    kv("eval.f1", f1.value * 100.0);
    kv("eval.docs", acc.support);
    std::fprintf(stderr, "accuracy %.2f%%   (%" PRIu64 " documents)\n", acc.value * 100.0,
                 acc.support);
  }
}

// --- subcommands -------------------------------------------------------------

struct CommonArgs {
  std::string config_path;
  std::string task;
  std::string artifact;
  std::string baseline;
  std::string out;
  std::uint64_t seed = 0;
  bool synthetic = false;
  int runs = 50;
  int input_len = 0;  // 0 = task default
};

int cmd_analyze(const CommonArgs& a) {
  Config cfg = cli_config(a.config_path, a.task);
  const TaskKind task = config_task(cfg);
  const int t = a.input_len > 0 ? a.input_len : default_input_len(task);

  CostReport report;
  CostReport base;
  const bool with_base = !a.baseline.empty();
  const ReprKind base_kind = with_base ? repr_from_name(a.baseline) : ReprKind::kConvGlu;

  switch (task) {
    case TaskKind::kNwp: {
      NwpConfig c = nwp_config_from(cfg);
      report = cost_report(c, t);
      if (with_base) {
        NwpConfig b = c;
        b.repr = c.repr.with_kind(base_kind);
        base = cost_report(b, t);
      }
      break;
    }
    case TaskKind::kIntentSlot: {
      IntentSlotConfig c = intent_slot_config_from(cfg);
      report = cost_report(c, t);
      if (with_base) {
        IntentSlotConfig b = c;
        b.intent_tower = c.intent_tower.with_kind(base_kind);
        b.slot_tower = c.slot_tower.with_kind(base_kind);
        base = cost_report(b, t);
      }
      break;
    }
    case TaskKind::kDocClass: {
      DocClassConfig c = doc_class_config_from(cfg);
      report = cost_report(c, t);
      if (with_base) {
        DocClassConfig b = c;
        b.repr = c.repr.with_kind(base_kind);
        base = cost_report(b, t);
      }
      break;
    }
  }
  cfg.allow_unused_prefix("train.");
  cfg.allow_unused_prefix("synth.");
  cfg.allow_unused_prefix("data.");
  cfg.finish();

  if (with_base) set_baseline(report, base);
  kv("analyze.input_len", static_cast<std::uint64_t>(t));
  std::fputs(report.kv("cost").c_str(), stdout);
  std::fputs(report.text().c_str(), stderr);
  if (with_base) std::fputs(base.text().c_str(), stderr);
  return 0;
}

int cmd_train(const CommonArgs& a) {
  Config cfg = cli_config(a.config_path, a.task);
  const TaskKind task = config_task(cfg);

  Rng init_rng(a.seed);
  AnyModel model = build_model(cfg, init_rng);
  const TrainOptions opts = train_options_from(cfg, task, a.seed);
  TaskData data = gather_data(task, cfg, a.synthetic, a.seed);
  cfg.finish();
  check_dims(model, data);

  TrainStats stats;
  switch (task) {
    case TaskKind::kNwp:
      stats = train_nwp(*model.nwp, data.nwp_train, opts);
      break;
    case TaskKind::kIntentSlot:
      stats = train_intent_slot(*model.intent_slot, data.is_train, opts);
      break;
    case TaskKind::kDocClass:
      stats = train_doc_class(*model.doc_class, data.dc_train, opts);
      break;
  }

  const std::string out = a.out.empty() ? std::string(task_name(task)) + ".fcnv" : a.out;
  save_model(out, model);

  kv("train.samples", static_cast<std::uint64_t>(
                          task == TaskKind::kNwp         ? data.nwp_train.lines.size()
                          : task == TaskKind::kIntentSlot ? data.is_train.samples.size()
                                                          : data.dc_train.docs.size()));
  kv("train.steps", static_cast<std::uint64_t>(stats.steps));
  kv("train.initial_loss", stats.initial_loss);
  kv("train.final_loss", stats.final_loss);
  kv("params.total", model.param_count());
  kv("artifact.path", out);
  kv("artifact.bytes", artifact_size_bytes(artifact_from_model(model)));
  return 0;
}

int cmd_eval(const CommonArgs& a) {
  AnyModel model = load_model(a.artifact);
  Config cfg = a.config_path.empty()
                   ? Config::from_map({{"task", task_name(model.task())}}, "<eval>")
                   : Config::parse_file(a.config_path);
  const TaskKind task = config_task(cfg);
  if (task != model.task())
    throw ConfigError(std::string("artifact task ") + task_name(model.task()) +
                      " does not match config task " + task_name(task));
  cfg.allow_unused_prefix("encoder.");
  cfg.allow_unused_prefix("nwp.");
  cfg.allow_unused_prefix("intent_slot.");
  cfg.allow_unused_prefix("doc_class.");
  cfg.allow_unused_prefix("train.");
  TaskData data = gather_data(task, cfg, a.synthetic, a.seed);
  cfg.finish();
  eval_and_print(model, data);
  return 0;
}

int cmd_bench(const CommonArgs& a) {
  AnyModel model = load_model(a.artifact);
  const int t = a.input_len > 0 ? a.input_len : default_input_len(model.task());
  const BenchResult r = bench_model(model, t, a.runs);
  kv("bench.input_len", static_cast<std::uint64_t>(t));
  kv("bench.file_bytes", r.file_size_bytes);
  kv("bench.params", model.param_count());
  kv("bench.weight_bytes", r.weight_bytes);
  kv("bench.transient_bytes", r.transient_bytes);
  kv("bench.peak_tensor_bytes", r.peak_tensor_bytes());
  kv("bench.latency_median_ms", r.latency.median_ms);
  kv("bench.latency_p95_ms", r.latency.p95_ms);
  kv("bench.runs", static_cast<std::uint64_t>(r.latency.runs));
  kv("bench.warmups", static_cast<std::uint64_t>(r.latency.warmups));
  kv("bench.batch", static_cast<std::uint64_t>(r.latency.batch));
  std::fprintf(stderr,
               "%s | %s params | file %s B | median %.3f ms  p95 %.3f ms | peak tensor %s B%s\n",
               task_name(model.task()), human_count(model.param_count()).c_str(),
               human_count(r.file_size_bytes).c_str(), r.latency.median_ms, r.latency.p95_ms,
               human_count(r.peak_tensor_bytes()).c_str(),
               r.latency.batch > 1 ? " (sub-ms, batched)" : "");
  return 0;
}

int cmd_export(const CommonArgs& a) {
  const ArtifactData art = load_artifact(a.artifact);
  std::FILE* out = stdout;
  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out);
    if (!file) throw ConfigError("cannot open " + a.out + " for writing");
  }
  auto emit = [&](const std::string& line) {
    if (a.out.empty())
      std::fputs(line.c_str(), out);
    else
      file << line;
  };
  for (const auto& [k, v] : art.header) emit("# " + k + "=" + v + "\n");
  for (const auto& [name, t] : art.tensors) {
    std::string line = name + " [";
    for (int i = 0; i < t.rank(); ++i)
      line += (i ? " " : "") + std::to_string(t.dim(i));
    line += "]";
    char buf[32];
    for (std::size_t i = 0; i < t.size(); ++i) {
      std::snprintf(buf, sizeof buf, " %.9g", t[i]);
      line += buf;
    }
    line += "\n";
    emit(line);
  }
  return 0;
}

// Builds the row model for the ladder; config structs are rebuilt per row so
// every representation is validated under the task's constraints.
AnyModel build_row_model(TaskKind task, Config& base, ReprKind row, Rng& rng,
                         CostReport* report, int t) {
  AnyModel m;
  switch (task) {
    case TaskKind::kNwp: {
      NwpConfig c = nwp_config_from(base);
      c.repr = c.repr.with_kind(row);
      c.validate();
      *report = cost_report(c, t);
      m.nwp = std::make_unique<NwpModel>(c, rng);
      break;
    }
    case TaskKind::kIntentSlot: {
      IntentSlotConfig c = intent_slot_config_from(base);
      c.intent_tower = c.intent_tower.with_kind(row);
      c.slot_tower = c.slot_tower.with_kind(row);
      c.validate();
      *report = cost_report(c, t);
      m.intent_slot = std::make_unique<IntentSlotModel>(c, rng);
      break;
    }
    case TaskKind::kDocClass: {
      DocClassConfig c = doc_class_config_from(base);
      c.repr = c.repr.with_kind(row);
      c.validate();
      *report = cost_report(c, t);
      m.doc_class = std::make_unique<DocClassModel>(c, rng);
      break;
    }
  }
  return m;
}

int cmd_ladder(const CommonArgs& a) {
  Config cfg = cli_config(a.config_path, a.task);
  const TaskKind task = config_task(cfg);
  const int t = a.input_len > 0 ? a.input_len : default_input_len(task);
  cfg.allow_unused_prefix("train.");
  cfg.allow_unused_prefix("synth.");
  cfg.allow_unused_prefix("data.");

  kv("ladder.task", task_name(task));
  kv("ladder.input_len", static_cast<std::uint64_t>(t));

  Rng root(a.seed);
  struct Row {
    std::string name;
    std::uint64_t params, ops, bytes;
  };
  std::vector<Row> rows;
  for (ReprKind kind : all_repr_kinds()) {
    Rng row_rng = root.split();
    CostReport report;
    AnyModel m = build_row_model(task, cfg, kind, row_rng, &report, t);
    fixed_inference(m, t)();  // every representation must run the task forward
    Row row;
    row.name = repr_name(kind);
    row.params = m.param_count();
    row.ops = report.total_ops();
    row.bytes = artifact_size_bytes(artifact_from_model(m));
    kv("ladder." + row.name + ".params", row.params);
    kv("ladder." + row.name + ".ops", row.ops);
    kv("ladder." + row.name + ".file_bytes", row.bytes);
    rows.push_back(std::move(row));
  }
  cfg.finish();

  double base_params = 0, base_ops = 0;
  for (const auto& r : rows)
    if (r.name == "conv_glu") {
      base_params = static_cast<double>(r.params);
      base_ops = static_cast<double>(r.ops);
    }
  std::fprintf(stderr, "%-28s %12s %14s %12s %8s %8s\n", task_name(task), "params",
               "ops", "file B", "par x", "ops x");
  for (const auto& r : rows)
    std::fprintf(stderr, "%-28s %12" PRIu64 " %14" PRIu64 " %12" PRIu64 " %8.2f %8.2f\n",
                 r.name.c_str(), r.params, r.ops, r.bytes,
                 base_params > 0 ? base_params / static_cast<double>(r.params) : 0.0,
                 base_ops > 0 ? base_ops / static_cast<double>(r.ops) : 0.0);
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"lightweight convolutional text models: analyze, train, evaluate, benchmark"};
  app.require_subcommand(1);

  CommonArgs a;

  auto add_model_source = [&](CLI::App* cmd) {
    cmd->add_option("--config", a.config_path, "config file (flat key = value)");
    cmd->add_option("--task", a.task, "task name: nwp | intent_slot | doc_class");
  };

  CLI::App* analyze = app.add_subcommand("analyze", "per-layer parameter/op report");
  add_model_source(analyze);
  analyze->add_option("--input-len", a.input_len, "input length for op counts");
  analyze->add_option("--baseline", a.baseline, "representation row to compare against");

  CLI::App* train = app.add_subcommand("train", "train a model and save an artifact");
  add_model_source(train);
  train->add_option("--seed", a.seed, "RNG seed (init, shuffling, dropout, synthetic data)")
      ->required();
  train->add_flag("--synthetic", a.synthetic, "use the built-in task generator");
  train->add_option("--out", a.out, "artifact output path (default <task>.fcnv)");

  CLI::App* eval = app.add_subcommand("eval", "score an artifact on a dataset");
  eval->add_option("artifact", a.artifact, "model artifact path")->required();
  eval->add_option("--config", a.config_path, "config file with data.* keys");
  eval->add_flag("--synthetic", a.synthetic, "use the built-in task generator");
  eval->add_option("--seed", a.seed, "seed for --synthetic (match the training seed)");

  CLI::App* bench = app.add_subcommand("bench", "latency/memory/file-size measurements");
  bench->add_option("artifact", a.artifact, "model artifact path")->required();
  bench->add_option("--runs", a.runs, "timed runs (minimum 50)");
  bench->add_option("--input-len", a.input_len, "inference input length");

  CLI::App* exp = app.add_subcommand("export", "plain-text weight dump of an artifact");
  exp->add_option("artifact", a.artifact, "model artifact path")->required();
  exp->add_option("--out", a.out, "dump file (default stdout)");

  CLI::App* ladder = app.add_subcommand("ladder", "run all representation rows through a task");
  add_model_source(ladder);
  ladder->add_option("--seed", a.seed, "RNG seed for row initialization")->required();
  ladder->add_option("--input-len", a.input_len, "input length for op counts and the probe");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(a);
    if (train->parsed()) return cmd_train(a);
    if (eval->parsed()) return cmd_eval(a);
    if (bench->parsed()) return cmd_bench(a);
    if (exp->parsed()) return cmd_export(a);
    if (ladder->parsed()) return cmd_ladder(a);
    throw InternalError("no subcommand dispatched");
  } catch (const ArtifactError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 1;
  }
}

}  // namespace fcnv
