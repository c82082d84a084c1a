#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <string>
#include <vector>

#include "fcnv/artifact.hpp"
#include "fcnv/config.hpp"
#include "fcnv/errors.hpp"

using namespace fcnv;

namespace {

bool config_error_mentions(const std::function<void()>& fn, const std::string& needle) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

}  // namespace

TEST_CASE("config parses key = value with comments and loose whitespace") {
  Config cfg = Config::parse_string(
      "# a comment line\n"
      "alpha = 1\n"
      "\n"
      "  beta.gamma=hello world  \n"
      "\t# indented comment\n"
      "delta =  -0.5\n",
      "inline");
  CHECK(cfg.origin() == "inline");
  CHECK(cfg.has("alpha"));
  CHECK(!cfg.has("epsilon"));
  CHECK(cfg.get_int("alpha") == 1);
  CHECK(cfg.get_string("beta.gamma") == "hello world");  // inner spaces kept
  CHECK(cfg.get_double("delta") == -0.5);
  CHECK_NOTHROW(cfg.finish());
}

TEST_CASE("config parse errors carry origin and line number") {
  auto parse = [](const std::string& text) {
    return [text] { Config::parse_string(text, "bad.cfg"); };
  };
  CHECK(config_error_mentions(parse("a = 1\nnonsense\n"), "bad.cfg:2"));
  CHECK(config_error_mentions(parse("a = 1\nnonsense\n"), "key = value"));
  CHECK(config_error_mentions(parse("a b = 1\n"), "bad key"));
  CHECK(config_error_mentions(parse("= 1\n"), "bad key"));
  CHECK(config_error_mentions(parse("a =\n"), "empty value"));
  CHECK(config_error_mentions(parse("a = 1\na = 2\n"), ":2"));
  CHECK(config_error_mentions(parse("a = 1\na = 2\n"), "duplicate"));
  CHECK(config_error_mentions([] { Config::parse_file("/nonexistent.cfg"); }, "cannot open"));
}

TEST_CASE("typed getters insist on fully numeric values") {
  Config cfg = Config::parse_string("n = 12\nbadn = 12x\nd = 2.5e-1\nbadd = 1.2.3\n", "t");
  CHECK(cfg.get_int("n") == 12);
  CHECK(cfg.get_double("d") == 0.25);
  CHECK(config_error_mentions([&] { cfg.get_int("badn"); }, "non-integer"));
  CHECK(config_error_mentions([&] { cfg.get_double("badd"); }, "non-numeric"));
  CHECK(config_error_mentions([&] { cfg.get_int("absent"); }, "missing required"));

  // Fallbacks apply only when the key is absent.
  CHECK(cfg.get_int("absent", 7) == 7);
  CHECK(cfg.get_double("absent", 0.5) == 0.5);
  CHECK(cfg.get_string("absent", "x") == "x");
  CHECK(cfg.get_int("n", 99) == 12);
}

TEST_CASE("finish names every unread key") {
  Config cfg = Config::parse_string("used = 1\nstray.one = a\nstray.two = b\n", "t");
  cfg.get_int("used");
  CHECK(config_error_mentions([&] { cfg.finish(); }, "stray.one"));
  CHECK(config_error_mentions([&] { cfg.finish(); }, "stray.two"));
  CHECK(config_error_mentions([&] { cfg.finish(); }, "unknown key"));

  // A fallback read marks a present key as consumed.
  Config cfg2 = Config::parse_string("a = 3\n", "t");
  CHECK(cfg2.get_int("a", 0) == 3);
  CHECK_NOTHROW(cfg2.finish());
}

TEST_CASE("allow_unused_prefix consumes a namespace wholesale") {
  Config cfg = Config::parse_string("train.lr = 0.1\ntrain.epochs = 2\nmodel.c = 8\n", "t");
  cfg.get_int("model.c");
  cfg.allow_unused_prefix("train.");
  CHECK_NOTHROW(cfg.finish());
}

TEST_CASE("from_map behaves like parsed text") {
  Config cfg = Config::from_map({{"task", "doc_class"}, {"x", "4"}}, "header");
  CHECK(cfg.origin() == "header");
  CHECK(cfg.get_string("task") == "doc_class");
  CHECK(cfg.entries().size() == 2);
  CHECK(config_error_mentions([&] { cfg.finish(); }, "\"x\""));
}

TEST_CASE("task and padding dispatch") {
  Config n = Config::from_map({{"task", "nwp"}}, "t");
  CHECK(config_task(n) == TaskKind::kNwp);
  Config bad = Config::from_map({{"task", "translation"}}, "t");
  CHECK(config_error_mentions([&] { config_task(bad); }, "unknown task"));

  // Padding defaults to causal for next-word prediction, centered otherwise.
  Config e1 = Config::from_map(
      {{"encoder.variant", "conv_gelu"}, {"encoder.c", "8"}, {"encoder.n", "1"}}, "t");
  CHECK(repr_config_from(e1, TaskKind::kNwp).padding == Padding::kCausal);
  Config e2 = Config::from_map(
      {{"encoder.variant", "conv_gelu"}, {"encoder.c", "8"}, {"encoder.n", "1"}}, "t");
  CHECK(repr_config_from(e2, TaskKind::kDocClass).padding == Padding::kSame);

  Config e3 = Config::from_map({{"encoder.variant", "conv_gelu"},
                                {"encoder.c", "8"},
                                {"encoder.n", "1"},
                                {"encoder.padding", "wide"}},
                               "t");
  CHECK(config_error_mentions([&] { repr_config_from(e3, TaskKind::kDocClass); },
                              "\"same\" or \"causal\""));

  Config e4 = Config::from_map({{"encoder.variant", "transformer"},
                                {"encoder.c", "8"},
                                {"encoder.n", "1"}},
                               "t");
  CHECK(config_error_mentions([&] { repr_config_from(e4, TaskKind::kDocClass); },
                              "unknown representation"));
}

TEST_CASE("task configs survive the kv codec round trip") {
  NwpConfig nwp;
  nwp.vocab = 321;
  nwp.embed_dim = 48;
  nwp.rank = 12;
  nwp.repr.kind = ReprKind::kSeparableBottleneckGelu;
  nwp.repr.channels = 48;
  nwp.repr.n_blocks = 3;
  nwp.repr.kernel = 5;
  nwp.repr.bottleneck = 6;
  nwp.repr.dropout = 0.25;
  nwp.repr.padding = Padding::kCausal;
  {
    Config cfg = Config::from_map(config_kv(nwp), "rt");
    CHECK(config_task(cfg) == TaskKind::kNwp);
    NwpConfig back = nwp_config_from(cfg);
    CHECK_NOTHROW(cfg.finish());  // codec emits exactly the keys readers use
    CHECK(back.vocab == nwp.vocab);
    CHECK(back.embed_dim == nwp.embed_dim);
    CHECK(back.rank == nwp.rank);
    CHECK(back.repr.kind == nwp.repr.kind);
    CHECK(back.repr.channels == nwp.repr.channels);
    CHECK(back.repr.n_blocks == nwp.repr.n_blocks);
    CHECK(back.repr.kernel == nwp.repr.kernel);
    CHECK(back.repr.bottleneck == nwp.repr.bottleneck);
    CHECK(back.repr.dropout == nwp.repr.dropout);
    CHECK(back.repr.padding == Padding::kCausal);
  }

  IntentSlotConfig is;
  is.char_vocab = 39;
  is.char_dim = 12;
  is.char_cnn_dim = 24;
  is.gaz_vocab = 6;
  is.gaz_dim = 8;
  is.n_intents = 8;
  is.n_slots = 6;
  is.intent_tower.kind = ReprKind::kConvGlu;
  is.intent_tower.channels = 32;
  is.intent_tower.n_blocks = 2;
  is.slot_tower = is.intent_tower;
  {
    Config cfg = Config::from_map(config_kv(is), "rt");
    CHECK(config_task(cfg) == TaskKind::kIntentSlot);
    IntentSlotConfig back = intent_slot_config_from(cfg);
    CHECK_NOTHROW(cfg.finish());
    CHECK(back.char_vocab == 39);
    CHECK(back.char_cnn_dim == 24);
    CHECK(back.n_slots == 6);
    CHECK(back.intent_tower.kind == ReprKind::kConvGlu);
    CHECK(back.slot_tower.kind == ReprKind::kConvGlu);  // towers share keys
    CHECK(back.slot_tower.channels == 32);
  }

  DocClassConfig dc;
  dc.embed_dim = 16;
  dc.pool = PoolKind::kAvg;
  dc.classes = 3;
  dc.repr.kind = ReprKind::kSeparableGelu;
  dc.repr.channels = 16;
  dc.repr.n_blocks = 2;
  {
    Config cfg = Config::from_map(config_kv(dc), "rt");
    CHECK(config_task(cfg) == TaskKind::kDocClass);
    DocClassConfig back = doc_class_config_from(cfg);
    CHECK_NOTHROW(cfg.finish());
    CHECK(back.pool == PoolKind::kAvg);
    CHECK(back.classes == 3);
    CHECK(back.repr.kind == ReprKind::kSeparableGelu);
  }

  Config badpool = Config::from_map(
      {{"encoder.variant", "conv_gelu"}, {"encoder.c", "8"}, {"encoder.n", "1"},
       {"doc_class.pool", "median"}},
      "t");
  CHECK(config_error_mentions([&] { doc_class_config_from(badpool); }, "median"));
}

TEST_CASE("shipped config files parse and build their models") {
  const std::string dir = FCNV_CONFIG_DIR;
  const std::vector<std::string> files = {
      "nwp_desk.cfg",          "nwp_ref.cfg",       "intent_slot_desk.cfg",
      "intent_slot_ref.cfg",   "doc_class_desk.cfg", "doc_class_ref.cfg",
  };
  for (const auto& name : files) {
    CAPTURE(name);
    Config cfg = Config::parse_file(dir + "/" + name);
    Rng rng(1);
    AnyModel m = build_model(cfg, rng);
    cfg.allow_unused_prefix("train.");
    cfg.allow_unused_prefix("synth.");
    CHECK_NOTHROW(cfg.finish());
    CHECK(m.param_count() > 0);

    // Reference models and their desk variants agree on the task.
    const bool is_nwp = name.rfind("nwp", 0) == 0;
    CHECK((m.task() == TaskKind::kNwp) == is_nwp);
  }
}

TEST_CASE("reference configs are bigger than desk configs") {
  const std::string dir = FCNV_CONFIG_DIR;
  for (const std::string task : {"nwp", "intent_slot", "doc_class"}) {
    CAPTURE(task);
    Config desk = Config::parse_file(dir + "/" + task + "_desk.cfg");
    Config ref = Config::parse_file(dir + "/" + task + "_ref.cfg");
    Rng rng(1);
    AnyModel md = build_model(desk, rng);
    AnyModel mr = build_model(ref, rng);
    CHECK(mr.param_count() > md.param_count());
  }
}
