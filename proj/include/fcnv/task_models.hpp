#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "fcnv/autodiff.hpp"
#include "fcnv/blocks.hpp"
#include "fcnv/task_config.hpp"

namespace fcnv {

// --- recurrent baseline ---

// Single-layer LSTM; gates stacked [i; f; g; o] so w_x is [4h, in],
// w_h is [4h, h], bias [4h]. Zero initial state.
struct LstmParams {
  Tensor w_x;
  Tensor w_h;
  Tensor bias;

  int hidden() const { return w_h.dim(1); }
  int input() const { return w_x.dim(1); }
  void validate() const;
};

LstmParams init_lstm(int input, int hidden, Rng& rng);

// x [in, t] -> hidden sequence [h, t]; reverse runs the recurrence from the
// last timestep towards the first (outputs stay aligned to input times).
Tensor lstm_forward(const Tensor& x, const LstmParams& params, bool reverse = false);

struct LstmGrads {
  Tensor x;
  Tensor w_x;
  Tensor w_h;
  Tensor bias;
};

// Full backpropagation through time (recomputes the forward internally).
LstmGrads lstm_backward(const Tensor& x, const LstmParams& params, bool reverse,
                        const Tensor& grad_out);

// Tape node wrapping the recurrence; parameters bind under `prefix` as
// ".wx", ".wh", ".b".
ad::Var lstm_on(ad::Binder& bind, ad::Var x, const LstmParams& params, const std::string& prefix,
                bool reverse);

// The "recurrent" comparison row: unidirectional (h = c) under causal
// padding, otherwise bidirectional (h = c/2 per direction, concatenated).
class RecurrentEncoder : public Representation {
 public:
  RecurrentEncoder(const ReprConfig& cfg, std::string prefix, Rng& rng);

  int channels() const override { return channels_; }
  std::string kind() const override { return "recurrent"; }
  bool causal() const override { return !bidirectional_; }

  Tensor forward(const Tensor& x) const override;
  ad::Var forward_on(ad::Binder& bind, ad::Var x, Rng* rng, bool training) const override;
  void visit_params(const ParamVisitor& f) override;

 private:
  int channels_;
  bool bidirectional_;
  double dropout_;
  std::string prefix_;
  LstmParams fwd_;
  LstmParams bwd_;  // bidirectional only
};

std::unique_ptr<Representation> make_representation(const ReprConfig& cfg,
                                                    const std::string& prefix, Rng& rng);

// --- factorized embedding (NWP) ---

struct FactorizedEmbedding {
  Tensor w_a;  // [V, r]
  Tensor w_b;  // [r, d]

  int vocab() const { return w_a.dim(0); }
  int rank() const { return w_a.dim(1); }
  int dim() const { return w_b.dim(1); }
};

// W_a x W_b, recomputed per forward pass (never cached across updates).
Tensor materialize(const FactorizedEmbedding& fe);

// --- next-word prediction ---

class NwpModel {
 public:
  NwpModel(NwpConfig cfg, Rng& rng);

  const NwpConfig& config() const { return cfg_; }
  Representation& repr() { return *repr_; }

  // [n+1, V]: row i holds the logits for the token following the first i
  // tokens (row 0 = after BOS only).
  Tensor next_logits_all(const std::vector<int>& tokens) const;
  // [n, V]: row i predicts token i from tokens before it; the training view.
  Tensor nwp_forward(const std::vector<int>& tokens) const;

  ad::Var forward_on(ad::Binder& bind, const std::vector<int>& tokens, Rng* rng, bool training);
  void visit_params(const ParamVisitor& f);

 private:
  Tensor input_map(const std::vector<int>& prefix) const;  // [d, len(prefix)+1]

  NwpConfig cfg_;
  FactorizedEmbedding emb_;
  Tensor bos_;  // [1, d] learned start-of-sequence embedding
  std::unique_ptr<Representation> repr_;
};

// --- joint intent + slot ---

struct CharCnnParams {
  struct WidthConv {
    Tensor filters;  // [d_c/3, char_dim, width]
    Tensor bias;     // [d_c/3]
  };
  Tensor embed;  // [char_vocab, char_dim]; id 0 is PAD
  std::array<WidthConv, 3> convs;  // widths 2, 3, 4
};

// Word -> fixed vector: embed chars, run each width's conv over the fully
// zero-padded sequence, max-pool over time, concatenate. Empty words encode
// the PAD character.
Tensor char_word_encode(const std::vector<int>& word, const CharCnnParams& params);

struct IntentSlotInput {
  std::vector<std::vector<int>> word_chars;  // per token: char ids
  std::vector<std::vector<int>> gazetteer;   // per token: 0..2 feature ids
};

struct IntentSlotLogits {
  Tensor intent;  // [n_intents]
  Tensor slots;   // [n_tokens, n_slots]
};

class IntentSlotModel {
 public:
  IntentSlotModel(IntentSlotConfig cfg, Rng& rng);

  const IntentSlotConfig& config() const { return cfg_; }

  IntentSlotLogits forward(const IntentSlotInput& input) const;
  struct TapeLogits {
    ad::Var intent;
    ad::Var slots;
  };
  TapeLogits forward_on(ad::Binder& bind, const IntentSlotInput& input, Rng* rng, bool training);
  void visit_params(const ParamVisitor& f);

 private:
  Tensor word_map(const IntentSlotInput& input) const;  // [word_dim, n_tokens]
  ad::Var word_map_on(ad::Binder& bind, const IntentSlotInput& input) const;

  IntentSlotConfig cfg_;
  CharCnnParams char_cnn_;
  Tensor gaz_embed_;  // [gaz_vocab, gaz_dim]
  std::unique_ptr<Representation> intent_tower_;
  std::unique_ptr<Representation> slot_tower_;
  Tensor intent_w_, intent_b_;  // [c, n_intents], [n_intents]
  Tensor slot_w_, slot_b_;      // [c, n_slots], [n_slots]
};

// --- document classification ---

class DocClassModel {
 public:
  DocClassModel(DocClassConfig cfg, Rng& rng);

  const DocClassConfig& config() const { return cfg_; }

  Tensor forward(const std::vector<int>& bytes) const;  // [classes] logits
  ad::Var forward_on(ad::Binder& bind, const std::vector<int>& bytes, Rng* rng, bool training);
  void visit_params(const ParamVisitor& f);

 private:
  DocClassConfig cfg_;
  Tensor embed_;  // [256, d]
  std::unique_ptr<Representation> repr_;
  Tensor head_w_, head_b_;  // [d, classes], [classes]
};

}  // namespace fcnv
