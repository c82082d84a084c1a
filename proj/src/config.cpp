#include "fcnv/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fcnv/dataset.hpp"
#include "fcnv/errors.hpp"

namespace fcnv {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  if (std::strtod(buf, nullptr) == v) return buf;
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

Config Config::parse_string(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": expected \"key = value\"");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty() || key.find_first_of(" \t") != std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": bad key \"" + key + "\"");
    if (value.empty())
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty value for \"" +
                        key + "\"");
    if (!cfg.values_.emplace(key, value).second)
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": duplicate key \"" + key +
                        "\"");
  }
  return cfg;
}

Config Config::from_map(std::map<std::string, std::string> values, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  cfg.values_ = std::move(values);
  return cfg;
}

std::string Config::get_string(const std::string& key) {
  auto it = values_.find(key);
  if (it == values_.end())
    throw ConfigError(origin_ + ": missing required key \"" + key + "\"");
  read_.insert(key);
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  read_.insert(key);
  return it->second;
}

namespace {

int parse_int(const std::string& origin, const std::string& key, const std::string& v) {
  char* end = nullptr;
  const long n = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError(origin + ": key \"" + key + "\" has non-integer value \"" + v + "\"");
  return static_cast<int>(n);
}

double parse_double(const std::string& origin, const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError(origin + ": key \"" + key + "\" has non-numeric value \"" + v + "\"");
  return d;
}

}  // namespace

int Config::get_int(const std::string& key) {
  return parse_int(origin_, key, get_string(key));
}

int Config::get_int(const std::string& key, int fallback) {
  if (!has(key)) return fallback;
  return get_int(key);
}

double Config::get_double(const std::string& key) {
  return parse_double(origin_, key, get_string(key));
}

double Config::get_double(const std::string& key, double fallback) {
  if (!has(key)) return fallback;
  return get_double(key);
}

void Config::allow_unused_prefix(const std::string& prefix) const {
  for (const auto& [key, value] : values_)
    if (key.rfind(prefix, 0) == 0) read_.insert(key);
}

void Config::finish() const {
  std::string strays;
  for (const auto& [key, value] : values_)
    if (read_.count(key) == 0) strays += (strays.empty() ? "" : ", ") + ("\"" + key + "\"");
  if (!strays.empty())
    throw ConfigError(origin_ + ": unknown key(s) " + strays);
}

// --- task-config codec ---

TaskKind config_task(Config& cfg) {
  return task_from_name(cfg.get_string("task"));
}

ReprConfig repr_config_from(Config& cfg, TaskKind task) {
  ReprConfig r;
  r.kind = repr_from_name(cfg.get_string("encoder.variant"));
  r.channels = cfg.get_int("encoder.c");
  r.n_blocks = cfg.get_int("encoder.n");
  r.kernel = cfg.get_int("encoder.k", 3);
  r.bottleneck = cfg.get_int("encoder.b", 0);
  r.dropout = cfg.get_double("encoder.dropout", 0.0);
  const std::string pad =
      cfg.get_string("encoder.padding", task == TaskKind::kNwp ? "causal" : "same");
  if (pad == "causal")
    r.padding = Padding::kCausal;
  else if (pad == "same")
    r.padding = Padding::kSame;
  else
    throw ConfigError(cfg.origin() + ": encoder.padding must be \"same\" or \"causal\", got \"" +
                      pad + "\"");
  return r;
}

NwpConfig nwp_config_from(Config& cfg) {
  NwpConfig c;
  c.repr = repr_config_from(cfg, TaskKind::kNwp);
  c.vocab = cfg.get_int("nwp.vocab");
  c.rank = cfg.get_int("nwp.rank");
  c.embed_dim = c.repr.channels;
  c.validate();
  return c;
}

IntentSlotConfig intent_slot_config_from(Config& cfg) {
  IntentSlotConfig c;
  c.intent_tower = repr_config_from(cfg, TaskKind::kIntentSlot);
  c.slot_tower = c.intent_tower;
  c.char_vocab = cfg.get_int("intent_slot.char_vocab",
                             static_cast<int>(kCharAlphabet.size()) + 1);
  c.char_dim = cfg.get_int("intent_slot.char_dim", 12);
  c.char_cnn_dim = cfg.get_int("intent_slot.char_cnn_dim", 24);
  c.gaz_vocab = cfg.get_int("intent_slot.gaz_vocab", 6);
  c.gaz_dim = cfg.get_int("intent_slot.gaz_dim", 8);
  c.n_intents = cfg.get_int("intent_slot.intents", 8);
  c.n_slots = cfg.get_int("intent_slot.slots", 6);
  c.validate();
  return c;
}

DocClassConfig doc_class_config_from(Config& cfg) {
  DocClassConfig c;
  c.repr = repr_config_from(cfg, TaskKind::kDocClass);
  c.embed_dim = c.repr.channels;
  const std::string pool = cfg.get_string("doc_class.pool", "max");
  if (pool == "max")
    c.pool = PoolKind::kMax;
  else if (pool == "avg")
    c.pool = PoolKind::kAvg;
  else
    throw ConfigError(cfg.origin() + ": doc_class.pool must be \"max\" or \"avg\", got \"" +
                      pool + "\"");
  c.classes = cfg.get_int("doc_class.classes", 2);
  c.validate();
  return c;
}

namespace {

void put_repr(std::map<std::string, std::string>& kv, const ReprConfig& r) {
  kv["encoder.variant"] = repr_name(r.kind);
  kv["encoder.c"] = std::to_string(r.channels);
  kv["encoder.n"] = std::to_string(r.n_blocks);
  kv["encoder.k"] = std::to_string(r.kernel);
  kv["encoder.b"] = std::to_string(r.bottleneck);
  kv["encoder.dropout"] = format_double(r.dropout);
  kv["encoder.padding"] = r.padding == Padding::kCausal ? "causal" : "same";
}

}  // namespace

std::map<std::string, std::string> config_kv(const NwpConfig& c) {
  std::map<std::string, std::string> kv;
  kv["task"] = task_name(TaskKind::kNwp);
  kv["nwp.vocab"] = std::to_string(c.vocab);
  kv["nwp.rank"] = std::to_string(c.rank);
  put_repr(kv, c.repr);
  return kv;
}

std::map<std::string, std::string> config_kv(const IntentSlotConfig& c) {
  if (!(c.intent_tower.kind == c.slot_tower.kind &&
        c.intent_tower.channels == c.slot_tower.channels &&
        c.intent_tower.n_blocks == c.slot_tower.n_blocks &&
        c.intent_tower.kernel == c.slot_tower.kernel &&
        c.intent_tower.bottleneck == c.slot_tower.bottleneck))
    throw InternalError("config_kv: towers with different settings cannot be serialized");
  std::map<std::string, std::string> kv;
  kv["task"] = task_name(TaskKind::kIntentSlot);
  kv["intent_slot.char_vocab"] = std::to_string(c.char_vocab);
  kv["intent_slot.char_dim"] = std::to_string(c.char_dim);
  kv["intent_slot.char_cnn_dim"] = std::to_string(c.char_cnn_dim);
  kv["intent_slot.gaz_vocab"] = std::to_string(c.gaz_vocab);
  kv["intent_slot.gaz_dim"] = std::to_string(c.gaz_dim);
  kv["intent_slot.intents"] = std::to_string(c.n_intents);
  kv["intent_slot.slots"] = std::to_string(c.n_slots);
  put_repr(kv, c.intent_tower);
  return kv;
}

std::map<std::string, std::string> config_kv(const DocClassConfig& c) {
  std::map<std::string, std::string> kv;
  kv["task"] = task_name(TaskKind::kDocClass);
  kv["doc_class.pool"] = c.pool == PoolKind::kMax ? "max" : "avg";
  kv["doc_class.classes"] = std::to_string(c.classes);
  put_repr(kv, c.repr);
  return kv;
}

}  // namespace fcnv
