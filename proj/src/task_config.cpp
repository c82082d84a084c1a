#include "fcnv/task_config.hpp"

namespace fcnv {

const char* task_name(TaskKind t) {
  switch (t) {
    case TaskKind::kNwp: return "nwp";
    case TaskKind::kIntentSlot: return "intent_slot";
    case TaskKind::kDocClass: return "doc_class";
  }
  throw InternalError("unknown task kind");
}

TaskKind task_from_name(const std::string& name) {
  if (name == "nwp") return TaskKind::kNwp;
  if (name == "intent_slot") return TaskKind::kIntentSlot;
  if (name == "doc_class") return TaskKind::kDocClass;
  throw ConfigError("unknown task '" + name + "' (expected nwp, intent_slot, doc_class)");
}

const char* repr_name(ReprKind k) {
  switch (k) {
    case ReprKind::kRecurrent: return "recurrent";
    case ReprKind::kConvGlu: return "conv_glu";
    case ReprKind::kConvGelu: return "conv_gelu";
    case ReprKind::kSeparableGelu: return "separable_gelu";
    case ReprKind::kSeparableBottleneckGelu: return "separable_bottleneck_gelu";
  }
  throw InternalError("unknown representation kind");
}

ReprKind repr_from_name(const std::string& name) {
  for (ReprKind k : all_repr_kinds()) {
    if (name == repr_name(k)) return k;
  }
  throw ConfigError("unknown representation '" + name +
                    "' (expected recurrent, conv_glu, conv_gelu, separable_gelu, "
                    "separable_bottleneck_gelu)");
}

const std::vector<ReprKind>& all_repr_kinds() {
  static const std::vector<ReprKind> k{
      ReprKind::kRecurrent, ReprKind::kConvGlu, ReprKind::kConvGelu, ReprKind::kSeparableGelu,
      ReprKind::kSeparableBottleneckGelu};
  return k;
}

ReprKind repr_of_variant(BlockVariant v) {
  switch (v) {
    case BlockVariant::kConvGlu: return ReprKind::kConvGlu;
    case BlockVariant::kConvGelu: return ReprKind::kConvGelu;
    case BlockVariant::kSeparableGelu: return ReprKind::kSeparableGelu;
    case BlockVariant::kSeparableBottleneckGelu: return ReprKind::kSeparableBottleneckGelu;
  }
  throw InternalError("unknown block variant");
}

BlockVariant ReprConfig::variant() const {
  switch (kind) {
    case ReprKind::kConvGlu: return BlockVariant::kConvGlu;
    case ReprKind::kConvGelu: return BlockVariant::kConvGelu;
    case ReprKind::kSeparableGelu: return BlockVariant::kSeparableGelu;
    case ReprKind::kSeparableBottleneckGelu: return BlockVariant::kSeparableBottleneckGelu;
    case ReprKind::kRecurrent: break;
  }
  throw ConfigError("recurrent representation has no block variant");
}

EncoderConfig ReprConfig::encoder() const {
  return EncoderConfig::uniform(variant(), n_blocks, channels, kernel, bottleneck, dropout,
                                padding);
}

ReprConfig ReprConfig::with_kind(ReprKind k) const {
  ReprConfig out = *this;
  out.kind = k;
  return out;
}

void ReprConfig::validate() const {
  if (channels <= 0) throw ConfigError("representation channels must be positive");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must be in [0, 1)");
  if (is_recurrent()) {
    if (padding != Padding::kCausal && channels % 2 != 0) {
      throw ConfigError("bidirectional recurrent baseline needs even channels, got " +
                        std::to_string(channels));
    }
    return;
  }
  encoder();  // delegates to EncoderConfig::uniform's validation
}

void NwpConfig::validate() const {
  if (vocab <= 0) throw ConfigError("nwp vocab must be positive");
  if (embed_dim <= 0) throw ConfigError("nwp embed_dim must be positive");
  if (rank <= 0 || rank > embed_dim) {
    throw ConfigError("nwp rank must be in [1, embed_dim], got " + std::to_string(rank));
  }
  if (repr.channels != embed_dim) {
    throw ConfigError("nwp representation channels (" + std::to_string(repr.channels) +
                      ") must equal embed_dim (" + std::to_string(embed_dim) + ")");
  }
  if (repr.padding != Padding::kCausal) {
    throw ConfigError("nwp needs a causal representation (future tokens must not leak)");
  }
  repr.validate();
}

void IntentSlotConfig::validate() const {
  if (char_vocab < 2) throw ConfigError("intent_slot char_vocab must be >= 2 (PAD + alphabet)");
  if (char_dim <= 0) throw ConfigError("intent_slot char_dim must be positive");
  if (char_cnn_dim <= 0 || char_cnn_dim % 3 != 0) {
    throw ConfigError("intent_slot char_cnn_dim must be a positive multiple of 3, got " +
                      std::to_string(char_cnn_dim));
  }
  if (gaz_vocab <= 0) throw ConfigError("intent_slot gaz_vocab must be positive");
  if (gaz_dim <= 0) throw ConfigError("intent_slot gaz_dim must be positive");
  if (n_intents <= 0) throw ConfigError("intent_slot n_intents must be positive");
  if (n_slots <= 0) throw ConfigError("intent_slot n_slots must be positive");
  for (const ReprConfig* tower : {&intent_tower, &slot_tower}) {
    if (tower->channels != word_dim()) {
      throw ConfigError("tower channels (" + std::to_string(tower->channels) +
                        ") must equal char_cnn_dim + gaz_dim (" + std::to_string(word_dim()) +
                        ")");
    }
    tower->validate();
  }
}

void DocClassConfig::validate() const {
  if (embed_dim <= 0) throw ConfigError("doc_class embed_dim must be positive");
  if (classes < 2) throw ConfigError("doc_class classes must be >= 2");
  if (repr.channels != embed_dim) {
    throw ConfigError("doc_class representation channels must equal embed_dim");
  }
  repr.validate();
}

}  // namespace fcnv
