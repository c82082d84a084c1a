#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

#include "fcnv/task_config.hpp"

namespace fcnv {

// Flat "key = value" text; '#' starts a comment line, keys are dot-namespaced.
// Getters record which keys were consumed so finish() can reject strays —
// a misspelled key is an error, not a silently ignored setting.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& origin);
  static Config from_map(std::map<std::string, std::string> values, const std::string& origin);

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key);
  std::string get_string(const std::string& key, const std::string& fallback);
  int get_int(const std::string& key);
  int get_int(const std::string& key, int fallback);
  double get_double(const std::string& key);
  double get_double(const std::string& key, double fallback);

  // Marks every key under the prefix as consumed; commands use it to ignore
  // namespaces that only other commands read (e.g. analyze skipping train.*).
  void allow_unused_prefix(const std::string& prefix) const;

  // Throws ConfigError naming every key that was never read.
  void finish() const;

  const std::string& origin() const { return origin_; }
  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::string origin_;
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> read_;
};

// --- task-config codec ---
// Config files and artifact headers use the same keys, so a saved header
// re-instantiates an identically-shaped model.

TaskKind config_task(Config& cfg);

// encoder.variant/c/n/k/b/dropout/padding; padding defaults to causal for
// NWP and same-centered otherwise.
ReprConfig repr_config_from(Config& cfg, TaskKind task);

NwpConfig nwp_config_from(Config& cfg);
IntentSlotConfig intent_slot_config_from(Config& cfg);  // both towers share encoder.*
DocClassConfig doc_class_config_from(Config& cfg);

std::map<std::string, std::string> config_kv(const NwpConfig& c);
std::map<std::string, std::string> config_kv(const IntentSlotConfig& c);
std::map<std::string, std::string> config_kv(const DocClassConfig& c);

}  // namespace fcnv
