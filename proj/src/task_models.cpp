#include "fcnv/task_models.hpp"

#include <cmath>
#include <utility>

namespace fcnv {

namespace {

Tensor uniform_filled(Shape shape, double bound, Rng& rng) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-bound, bound);
  return t;
}

// Embedding tables and factors start small and symmetric; linear maps use
// the same fan-in rule as conv filters.
constexpr double kEmbedBound = 0.1;

}  // namespace

// --- LSTM ---

void LstmParams::validate() const {
  if (w_x.rank() != 2 || w_h.rank() != 2 || bias.rank() != 1) {
    throw ShapeError("lstm params must be [4h, in], [4h, h], [4h]");
  }
  const int h = w_h.dim(1);
  if (w_x.dim(0) != 4 * h || w_h.dim(0) != 4 * h || bias.dim(0) != 4 * h) {
    throw ShapeError("lstm gate stack rows must be 4*hidden; got wx " + shape_str(w_x.shape()) +
                     ", wh " + shape_str(w_h.shape()) + ", bias " + shape_str(bias.shape()));
  }
}

LstmParams init_lstm(int input, int hidden, Rng& rng) {
  if (input <= 0 || hidden <= 0) throw ConfigError("lstm dims must be positive");
  LstmParams p;
  p.w_x = uniform_filled({4 * hidden, input}, std::sqrt(6.0 / input), rng);
  p.w_h = uniform_filled({4 * hidden, hidden}, std::sqrt(6.0 / hidden), rng);
  p.bias = Tensor({4 * hidden});
  return p;
}

namespace {

// One pass of the recurrence storing per-step gate values; shared by the
// plain forward (stores nothing) and the backward recomputation.
struct LstmTrace {
  std::vector<double> i, f, g, o, c;  // [T * h] in step order
};

Tensor lstm_run(const Tensor& x, const LstmParams& p, bool reverse, LstmTrace* trace) {
  p.validate();
  if (x.rank() != 2 || x.dim(0) != p.input()) {
    throw ShapeError("lstm expects [" + std::to_string(p.input()) + ", t] input, got " +
                     shape_str(x.shape()));
  }
  const int in = p.input(), h = p.hidden(), T = x.dim(1);
  if (trace) {
    for (auto* v : {&trace->i, &trace->f, &trace->g, &trace->o, &trace->c}) {
      v->assign(static_cast<std::size_t>(T) * h, 0.0);
    }
  }
  Tensor out({h, T});
  std::vector<double> hs(static_cast<std::size_t>(h), 0.0), cs(static_cast<std::size_t>(h), 0.0);
  std::vector<double> z(static_cast<std::size_t>(4) * h);
  for (int s = 0; s < T; ++s) {
    const int ts = reverse ? T - 1 - s : s;
    for (int r = 0; r < 4 * h; ++r) {
      double acc = p.bias[static_cast<std::size_t>(r)];
      for (int j = 0; j < in; ++j) acc += p.w_x(r, j) * x(j, ts);
      for (int j = 0; j < h; ++j) acc += p.w_h(r, j) * hs[static_cast<std::size_t>(j)];
      z[static_cast<std::size_t>(r)] = acc;
    }
    for (int j = 0; j < h; ++j) {
      const double gi = sigmoid_scalar(z[static_cast<std::size_t>(j)]);
      const double gf = sigmoid_scalar(z[static_cast<std::size_t>(h + j)]);
      const double gg = std::tanh(z[static_cast<std::size_t>(2 * h + j)]);
      const double go = sigmoid_scalar(z[static_cast<std::size_t>(3 * h + j)]);
      const std::size_t sj = static_cast<std::size_t>(s) * h + j;
      cs[static_cast<std::size_t>(j)] = gf * cs[static_cast<std::size_t>(j)] + gi * gg;
      hs[static_cast<std::size_t>(j)] = go * std::tanh(cs[static_cast<std::size_t>(j)]);
      if (trace) {
        trace->i[sj] = gi;
        trace->f[sj] = gf;
        trace->g[sj] = gg;
        trace->o[sj] = go;
        trace->c[sj] = cs[static_cast<std::size_t>(j)];
      }
      out(j, ts) = hs[static_cast<std::size_t>(j)];
    }
  }
  return out;
}

}  // namespace

Tensor lstm_forward(const Tensor& x, const LstmParams& params, bool reverse) {
  return lstm_run(x, params, reverse, nullptr);
}

LstmGrads lstm_backward(const Tensor& x, const LstmParams& params, bool reverse,
                        const Tensor& grad_out) {
  LstmTrace trace;
  Tensor hidden = lstm_run(x, params, reverse, &trace);
  if (!grad_out.same_shape(hidden)) {
    throw ShapeError("lstm grad shaped " + shape_str(grad_out.shape()) + ", hidden is " +
                     shape_str(hidden.shape()));
  }
  const int in = params.input(), h = params.hidden(), T = x.dim(1);

  LstmGrads g;
  g.x = Tensor(x.shape());
  g.w_x = Tensor(params.w_x.shape());
  g.w_h = Tensor(params.w_h.shape());
  g.bias = Tensor(params.bias.shape());

  std::vector<double> dh_next(static_cast<std::size_t>(h), 0.0);
  std::vector<double> dc_next(static_cast<std::size_t>(h), 0.0);
  std::vector<double> dz(static_cast<std::size_t>(4) * h);
  for (int s = T - 1; s >= 0; --s) {
    const int ts = reverse ? T - 1 - s : s;
    for (int j = 0; j < h; ++j) {
      const std::size_t sj = static_cast<std::size_t>(s) * h + j;
      const double gi = trace.i[sj], gf = trace.f[sj], gg = trace.g[sj], go = trace.o[sj];
      const double tc = std::tanh(trace.c[sj]);
      const double c_prev = s > 0 ? trace.c[sj - static_cast<std::size_t>(h)] : 0.0;
      const double dh = grad_out(j, ts) + dh_next[static_cast<std::size_t>(j)];
      const double dct = dh * go * (1.0 - tc * tc) + dc_next[static_cast<std::size_t>(j)];
      dz[static_cast<std::size_t>(j)] = dct * gg * gi * (1.0 - gi);
      dz[static_cast<std::size_t>(h + j)] = dct * c_prev * gf * (1.0 - gf);
      dz[static_cast<std::size_t>(2 * h + j)] = dct * gi * (1.0 - gg * gg);
      dz[static_cast<std::size_t>(3 * h + j)] = dh * tc * go * (1.0 - go);
      dc_next[static_cast<std::size_t>(j)] = dct * gf;
    }
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    for (int r = 0; r < 4 * h; ++r) {
      const double d = dz[static_cast<std::size_t>(r)];
      if (d == 0.0) continue;
      g.bias[static_cast<std::size_t>(r)] += d;
      for (int j = 0; j < in; ++j) {
        g.w_x(r, j) += d * x(j, ts);
        g.x(j, ts) += params.w_x(r, j) * d;
      }
      for (int j = 0; j < h; ++j) {
        dh_next[static_cast<std::size_t>(j)] += params.w_h(r, j) * d;
        if (s > 0) {
          // h_{s-1} = o_{s-1} * tanh(c_{s-1}), reconstructed from the trace.
          const std::size_t pj = static_cast<std::size_t>(s - 1) * h + j;
          g.w_h(r, j) += d * trace.o[pj] * std::tanh(trace.c[pj]);
        }
      }
    }
  }
  return g;
}

ad::Var lstm_on(ad::Binder& bind, ad::Var x, const LstmParams& params, const std::string& prefix,
                bool reverse) {
  ad::Tape& tape = bind.tape();
  ad::Var wx = bind(prefix + ".wx", params.w_x);
  ad::Var wh = bind(prefix + ".wh", params.w_h);
  ad::Var b = bind(prefix + ".b", params.bias);
  Tensor y = lstm_forward(tape.value(x), params, reverse);
  return tape.custom(std::move(y), {x, wx, wh, b}, [reverse](ad::Tape& t, int self) {
    const std::vector<int>& ps = t.parents_of(self);
    LstmParams p{t.value(ps[1]), t.value(ps[2]), t.value(ps[3])};
    LstmGrads g = lstm_backward(t.value(ps[0]), p, reverse, t.grad_of(self));
    t.accumulate(ps[0], g.x);
    t.accumulate(ps[1], g.w_x);
    t.accumulate(ps[2], g.w_h);
    t.accumulate(ps[3], g.bias);
  });
}

// --- RecurrentEncoder ---

RecurrentEncoder::RecurrentEncoder(const ReprConfig& cfg, std::string prefix, Rng& rng)
    : channels_(cfg.channels),
      bidirectional_(cfg.padding != Padding::kCausal),
      dropout_(cfg.dropout),
      prefix_(std::move(prefix)) {
  if (!cfg.is_recurrent()) throw ConfigError("RecurrentEncoder needs a recurrent config");
  cfg.validate();
  if (bidirectional_) {
    const int h = channels_ / 2;
    fwd_ = init_lstm(channels_, h, rng);
    bwd_ = init_lstm(channels_, h, rng);
  } else {
    fwd_ = init_lstm(channels_, channels_, rng);
  }
}

Tensor RecurrentEncoder::forward(const Tensor& x) const {
  if (!bidirectional_) return lstm_forward(x, fwd_, false);
  return concat_rows({lstm_forward(x, fwd_, false), lstm_forward(x, bwd_, true)});
}

ad::Var RecurrentEncoder::forward_on(ad::Binder& bind, ad::Var x, Rng* rng,
                                     bool training) const {
  ad::Tape& tape = bind.tape();
  ad::Var h = x;
  if (training && dropout_ > 0.0) {
    if (rng == nullptr) throw ConfigError("training with dropout needs an rng");
    h = tape.dropout(h, dropout_, *rng, true);
  }
  if (!bidirectional_) return lstm_on(bind, h, fwd_, prefix_, false);
  ad::Var f = lstm_on(bind, h, fwd_, prefix_ + ".fwd", false);
  ad::Var b = lstm_on(bind, h, bwd_, prefix_ + ".bwd", true);
  return tape.concat_rows({f, b});
}

void RecurrentEncoder::visit_params(const ParamVisitor& f) {
  if (!bidirectional_) {
    f(prefix_ + ".wx", fwd_.w_x);
    f(prefix_ + ".wh", fwd_.w_h);
    f(prefix_ + ".b", fwd_.bias);
    return;
  }
  f(prefix_ + ".fwd.wx", fwd_.w_x);
  f(prefix_ + ".fwd.wh", fwd_.w_h);
  f(prefix_ + ".fwd.b", fwd_.bias);
  f(prefix_ + ".bwd.wx", bwd_.w_x);
  f(prefix_ + ".bwd.wh", bwd_.w_h);
  f(prefix_ + ".bwd.b", bwd_.bias);
}

std::unique_ptr<Representation> make_representation(const ReprConfig& cfg,
                                                    const std::string& prefix, Rng& rng) {
  cfg.validate();
  if (cfg.is_recurrent()) return std::make_unique<RecurrentEncoder>(cfg, prefix, rng);
  return std::make_unique<ConvEncoder>(cfg.encoder(), prefix, rng);
}

// --- factorized embedding ---

Tensor materialize(const FactorizedEmbedding& fe) {
  if (fe.w_a.rank() != 2 || fe.w_b.rank() != 2 || fe.w_a.dim(1) != fe.w_b.dim(0)) {
    throw ShapeError("embedding factors " + shape_str(fe.w_a.shape()) + " x " +
                     shape_str(fe.w_b.shape()) + " do not conform");
  }
  return matmul(fe.w_a, fe.w_b);
}

// --- NWP ---

NwpModel::NwpModel(NwpConfig cfg, Rng& rng) : cfg_(std::move(cfg)) {
  cfg_.validate();
  emb_.w_a = uniform_filled({cfg_.vocab, cfg_.rank}, kEmbedBound, rng);
  emb_.w_b = uniform_filled({cfg_.rank, cfg_.embed_dim}, kEmbedBound, rng);
  bos_ = uniform_filled({1, cfg_.embed_dim}, kEmbedBound, rng);
  repr_ = make_representation(cfg_.repr, "repr", rng);
  if (!repr_->causal()) {
    throw ConfigError("nwp representation must be causal");
  }
}

Tensor NwpModel::next_logits_all(const std::vector<int>& tokens) const {
  for (int id : tokens) {
    if (id < 0 || id >= cfg_.vocab) {
      throw IndexError("token id " + std::to_string(id) + " outside vocab of " +
                       std::to_string(cfg_.vocab));
    }
  }
  const Tensor we = materialize(emb_);
  Tensor rows = tokens.empty() ? bos_ : concat_rows({bos_, embedding_lookup(we, tokens)});
  Tensor h = repr_->forward(transpose(rows));
  return matmul(transpose(h), transpose(we));
}

Tensor NwpModel::nwp_forward(const std::vector<int>& tokens) const {
  if (tokens.empty()) throw DataError("nwp_forward needs at least one token");
  for (int id : tokens) {
    if (id < 0 || id >= cfg_.vocab) {
      throw IndexError("token id " + std::to_string(id) + " outside vocab of " +
                       std::to_string(cfg_.vocab));
    }
  }
  std::vector<int> prefix(tokens.begin(), tokens.end() - 1);
  return next_logits_all(prefix);
}

ad::Var NwpModel::forward_on(ad::Binder& bind, const std::vector<int>& tokens, Rng* rng,
                             bool training) {
  if (tokens.empty()) throw DataError("nwp forward needs at least one token");
  ad::Tape& tape = bind.tape();
  ad::Var wa = bind("embedding.wa", emb_.w_a);
  ad::Var wb = bind("embedding.wb", emb_.w_b);
  ad::Var bos = bind("embedding.bos", bos_);
  ad::Var we = tape.matmul(wa, wb);  // shared by lookup and decoder: exact tying
  std::vector<int> prefix(tokens.begin(), tokens.end() - 1);
  ad::Var rows = prefix.empty()
                     ? bos
                     : tape.concat_rows({bos, tape.embedding_lookup(we, prefix)});
  ad::Var h = repr_->forward_on(bind, tape.transpose(rows), rng, training);
  return tape.matmul(tape.transpose(h), tape.transpose(we));
}

void NwpModel::visit_params(const ParamVisitor& f) {
  f("embedding.wa", emb_.w_a);
  f("embedding.wb", emb_.w_b);
  f("embedding.bos", bos_);
  repr_->visit_params(f);
}

// --- char CNN ---

Tensor char_word_encode(const std::vector<int>& word, const CharCnnParams& params) {
  const std::vector<int> ids = word.empty() ? std::vector<int>{0} : word;
  const Tensor x = transpose(embedding_lookup(params.embed, ids));  // [char_dim, len]
  std::vector<Tensor> pooled;
  int total = 0;
  for (const auto& wc : params.convs) {
    ConvSpec spec{wc.filters.dim(1), wc.filters.dim(0), wc.filters.dim(2), 1, 1, Padding::kFull};
    Tensor y = conv1d(x, ConvParams{spec, wc.filters, wc.bias});
    total += wc.filters.dim(0);
    pooled.push_back(pool_time(y, PoolKind::kMax).reshaped({wc.filters.dim(0), 1}));
  }
  return concat_rows(pooled).reshaped({total});
}

// --- intent + slot ---

IntentSlotModel::IntentSlotModel(IntentSlotConfig cfg, Rng& rng) : cfg_(std::move(cfg)) {
  cfg_.validate();
  char_cnn_.embed = uniform_filled({cfg_.char_vocab, cfg_.char_dim}, kEmbedBound, rng);
  const int per_width = cfg_.char_cnn_dim / 3;
  for (int wi = 0; wi < 3; ++wi) {
    const int width = kCharCnnWidths[wi];
    char_cnn_.convs[static_cast<std::size_t>(wi)].filters = uniform_filled(
        {per_width, cfg_.char_dim, width}, std::sqrt(6.0 / (cfg_.char_dim * width)), rng);
    char_cnn_.convs[static_cast<std::size_t>(wi)].bias = Tensor({per_width});
  }
  gaz_embed_ = uniform_filled({cfg_.gaz_vocab, cfg_.gaz_dim}, kEmbedBound, rng);
  intent_tower_ = make_representation(cfg_.intent_tower, "intent_tower", rng);
  slot_tower_ = make_representation(cfg_.slot_tower, "slot_tower", rng);
  const int c = cfg_.word_dim();
  intent_w_ = uniform_filled({c, cfg_.n_intents}, std::sqrt(6.0 / c), rng);
  intent_b_ = Tensor({cfg_.n_intents});
  slot_w_ = uniform_filled({c, cfg_.n_slots}, std::sqrt(6.0 / c), rng);
  slot_b_ = Tensor({cfg_.n_slots});
}

Tensor IntentSlotModel::word_map(const IntentSlotInput& input) const {
  if (input.word_chars.empty()) throw DataError("empty utterance");
  if (input.gazetteer.size() != input.word_chars.size()) {
    throw DataError("gazetteer rows (" + std::to_string(input.gazetteer.size()) +
                    ") misaligned with tokens (" + std::to_string(input.word_chars.size()) + ")");
  }
  std::vector<Tensor> cols;
  cols.reserve(input.word_chars.size());
  for (std::size_t i = 0; i < input.word_chars.size(); ++i) {
    Tensor cw = char_word_encode(input.word_chars[i], char_cnn_);  // [d_c]
    Tensor gz(Shape{cfg_.gaz_dim});
    if (!input.gazetteer[i].empty()) {
      gz = pool_time(transpose(embedding_lookup(gaz_embed_, input.gazetteer[i])), PoolKind::kMax);
    }
    cols.push_back(concat_rows({cw.reshaped({cfg_.char_cnn_dim, 1}),
                                gz.reshaped({cfg_.gaz_dim, 1})}));
  }
  return concat_cols(cols);
}

IntentSlotLogits IntentSlotModel::forward(const IntentSlotInput& input) const {
  const Tensor x = word_map(input);
  const int c = cfg_.word_dim();
  IntentSlotLogits out;
  Tensor ri = intent_tower_->forward(x);
  Tensor pooled = pool_time(ri, PoolKind::kMax);
  out.intent = linear(pooled.reshaped({1, c}), intent_w_, &intent_b_).reshaped({cfg_.n_intents});
  Tensor rs = slot_tower_->forward(x);
  out.slots = linear(transpose(rs), slot_w_, &slot_b_);
  return out;
}

ad::Var IntentSlotModel::word_map_on(ad::Binder& bind, const IntentSlotInput& input) const {
  if (input.word_chars.empty()) throw DataError("empty utterance");
  if (input.gazetteer.size() != input.word_chars.size()) {
    throw DataError("gazetteer rows (" + std::to_string(input.gazetteer.size()) +
                    ") misaligned with tokens (" + std::to_string(input.word_chars.size()) + ")");
  }
  ad::Tape& tape = bind.tape();
  ad::Var char_embed = bind("char_cnn.embed", char_cnn_.embed);
  ad::Var gaz_embed = bind("gazetteer.embed", gaz_embed_);
  std::array<std::pair<ad::Var, ad::Var>, 3> convs;
  for (int wi = 0; wi < 3; ++wi) {
    const std::string p = "char_cnn.w" + std::to_string(kCharCnnWidths[wi]);
    convs[static_cast<std::size_t>(wi)] = {
        bind(p + ".w", char_cnn_.convs[static_cast<std::size_t>(wi)].filters),
        bind(p + ".b", char_cnn_.convs[static_cast<std::size_t>(wi)].bias)};
  }

  std::vector<ad::Var> cols;
  cols.reserve(input.word_chars.size());
  for (std::size_t i = 0; i < input.word_chars.size(); ++i) {
    const std::vector<int> ids =
        input.word_chars[i].empty() ? std::vector<int>{0} : input.word_chars[i];
    ad::Var xc = tape.transpose(tape.embedding_lookup(char_embed, ids));
    std::vector<ad::Var> pooled;
    for (int wi = 0; wi < 3; ++wi) {
      const Tensor& filt = char_cnn_.convs[static_cast<std::size_t>(wi)].filters;
      ConvSpec spec{filt.dim(1), filt.dim(0), filt.dim(2), 1, 1, Padding::kFull};
      ad::Var y = tape.conv1d(xc, convs[static_cast<std::size_t>(wi)].first,
                              convs[static_cast<std::size_t>(wi)].second, spec);
      pooled.push_back(tape.reshape(tape.pool_time(y, PoolKind::kMax), {filt.dim(0), 1}));
    }
    ad::Var cw = tape.concat_rows(pooled);  // [d_c, 1]
    ad::Var gz = input.gazetteer[i].empty()
                     ? tape.leaf(Tensor(Shape{cfg_.gaz_dim, 1}))
                     : tape.reshape(
                           tape.pool_time(tape.transpose(tape.embedding_lookup(
                                              gaz_embed, input.gazetteer[i])),
                                          PoolKind::kMax),
                           {cfg_.gaz_dim, 1});
    cols.push_back(tape.concat_rows({cw, gz}));
  }
  return tape.concat_cols(cols);
}

IntentSlotModel::TapeLogits IntentSlotModel::forward_on(ad::Binder& bind,
                                                        const IntentSlotInput& input, Rng* rng,
                                                        bool training) {
  ad::Tape& tape = bind.tape();
  ad::Var x = word_map_on(bind, input);
  const int c = cfg_.word_dim();
  TapeLogits out;
  ad::Var ri = intent_tower_->forward_on(bind, x, rng, training);
  ad::Var pooled = tape.reshape(tape.pool_time(ri, PoolKind::kMax), {1, c});
  out.intent = tape.linear(pooled, bind("head.intent.w", intent_w_),
                           bind("head.intent.b", intent_b_));  // [1, n_intents]
  ad::Var rs = slot_tower_->forward_on(bind, x, rng, training);
  out.slots = tape.linear(tape.transpose(rs), bind("head.slot.w", slot_w_),
                          bind("head.slot.b", slot_b_));
  return out;
}

void IntentSlotModel::visit_params(const ParamVisitor& f) {
  f("char_cnn.embed", char_cnn_.embed);
  for (int wi = 0; wi < 3; ++wi) {
    const std::string p = "char_cnn.w" + std::to_string(kCharCnnWidths[wi]);
    f(p + ".w", char_cnn_.convs[static_cast<std::size_t>(wi)].filters);
    f(p + ".b", char_cnn_.convs[static_cast<std::size_t>(wi)].bias);
  }
  f("gazetteer.embed", gaz_embed_);
  intent_tower_->visit_params(f);
  slot_tower_->visit_params(f);
  f("head.intent.w", intent_w_);
  f("head.intent.b", intent_b_);
  f("head.slot.w", slot_w_);
  f("head.slot.b", slot_b_);
}

// --- doc class ---

DocClassModel::DocClassModel(DocClassConfig cfg, Rng& rng) : cfg_(std::move(cfg)) {
  cfg_.validate();
  embed_ = uniform_filled({DocClassConfig::kByteVocab, cfg_.embed_dim}, kEmbedBound, rng);
  repr_ = make_representation(cfg_.repr, "repr", rng);
  head_w_ = uniform_filled({cfg_.embed_dim, cfg_.classes}, std::sqrt(6.0 / cfg_.embed_dim), rng);
  head_b_ = Tensor({cfg_.classes});
}

Tensor DocClassModel::forward(const std::vector<int>& bytes) const {
  if (bytes.empty()) throw DataError("doc_class forward needs a non-empty byte sequence");
  Tensor h = repr_->forward(transpose(embedding_lookup(embed_, bytes)));
  Tensor pooled = pool_time(h, cfg_.pool);
  return linear(pooled.reshaped({1, cfg_.embed_dim}), head_w_, &head_b_)
      .reshaped({cfg_.classes});
}

ad::Var DocClassModel::forward_on(ad::Binder& bind, const std::vector<int>& bytes, Rng* rng,
                                  bool training) {
  if (bytes.empty()) throw DataError("doc_class forward needs a non-empty byte sequence");
  ad::Tape& tape = bind.tape();
  ad::Var x = tape.transpose(tape.embedding_lookup(bind("embed", embed_), bytes));
  ad::Var h = repr_->forward_on(bind, x, rng, training);
  ad::Var pooled = tape.reshape(tape.pool_time(h, cfg_.pool), {1, cfg_.embed_dim});
  return tape.linear(pooled, bind("head.w", head_w_), bind("head.b", head_b_));  // [1, classes]
}

void DocClassModel::visit_params(const ParamVisitor& f) {
  f("embed", embed_);
  repr_->visit_params(f);
  f("head.w", head_w_);
  f("head.b", head_b_);
}

}  // namespace fcnv
