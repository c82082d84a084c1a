#pragma once

#include <string>
#include <vector>

#include "fcnv/blocks.hpp"
#include "fcnv/nn_ops.hpp"

namespace fcnv {

enum class TaskKind { kNwp, kIntentSlot, kDocClass };

const char* task_name(TaskKind t);
TaskKind task_from_name(const std::string& name);

// The five comparison rows: the recurrent baseline plus the four-step
// convolutional ladder.
enum class ReprKind {
  kRecurrent,
  kConvGlu,
  kConvGelu,
  kSeparableGelu,
  kSeparableBottleneckGelu,
};

const char* repr_name(ReprKind k);
ReprKind repr_from_name(const std::string& name);
const std::vector<ReprKind>& all_repr_kinds();
ReprKind repr_of_variant(BlockVariant v);

// One knob set covering every row: conv rows read all fields, the recurrent
// row reads channels/dropout/padding (causal padding selects a unidirectional
// LSTM, same-centered a bidirectional one).
struct ReprConfig {
  ReprKind kind = ReprKind::kConvGelu;
  int channels = 0;
  int n_blocks = 0;
  int kernel = 3;
  int bottleneck = 0;
  double dropout = 0.0;
  Padding padding = Padding::kSame;

  bool is_recurrent() const { return kind == ReprKind::kRecurrent; }
  BlockVariant variant() const;   // conv rows only
  EncoderConfig encoder() const;  // conv rows only
  ReprConfig with_kind(ReprKind k) const;
  void validate() const;
};

struct NwpConfig {
  int vocab = 0;      // V
  int embed_dim = 0;  // d
  int rank = 0;       // r; embedding factors are [V, r] and [r, d]
  ReprConfig repr;    // channels == embed_dim, causal padding

  void validate() const;
};

// Char-CNN kernel widths are fixed; per-width filter count is
// char_cnn_dim / 3.
inline constexpr int kCharCnnWidths[3] = {2, 3, 4};

struct IntentSlotConfig {
  int char_vocab = 0;    // alphabet size (id 0 reserved for PAD)
  int char_dim = 0;      // char embedding dim
  int char_cnn_dim = 0;  // d_c, divisible by 3
  int gaz_vocab = 0;     // gazetteer feature vocabulary
  int gaz_dim = 0;       // d_g
  int n_intents = 0;
  int n_slots = 0;
  ReprConfig intent_tower;  // channels == word_dim()
  ReprConfig slot_tower;

  int word_dim() const { return char_cnn_dim + gaz_dim; }
  void validate() const;
};

struct DocClassConfig {
  static constexpr int kByteVocab = 256;

  int embed_dim = 0;  // byte embedding dim == encoder channels
  PoolKind pool = PoolKind::kMax;
  ReprConfig repr;
  int classes = 2;

  void validate() const;
};

}  // namespace fcnv
