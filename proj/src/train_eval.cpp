#include "fcnv/train_eval.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "fcnv/errors.hpp"

namespace fcnv {

Sgd::Sgd(double lr) : lr_(lr) {
  if (lr <= 0.0) throw ConfigError("sgd: learning rate must be positive");
}

void Sgd::step(const std::string& name, Tensor& param, const Tensor& grad) {
  if (!param.same_shape(grad))
    throw InternalError("sgd: grad shape " + shape_str(grad.shape()) + " for \"" + name +
                        "\" does not match param " + shape_str(param.shape()));
  for (std::size_t i = 0; i < param.size(); ++i) param[i] -= lr_ * grad[i];
}

Adam::Adam(double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  if (lr <= 0.0) throw ConfigError("adam: learning rate must be positive");
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
    throw ConfigError("adam: betas must lie in [0, 1)");
  if (eps <= 0.0) throw ConfigError("adam: epsilon must be positive");
}

void Adam::step(const std::string& name, Tensor& param, const Tensor& grad) {
  if (!param.same_shape(grad))
    throw InternalError("adam: grad shape " + shape_str(grad.shape()) + " for \"" + name +
                        "\" does not match param " + shape_str(param.shape()));
  auto it = state_.find(name);
  if (it == state_.end())
    it = state_
             .emplace(name,
                      State{Tensor::zeros(param.shape()), Tensor::zeros(param.shape()), 0})
             .first;
  State& s = it->second;
  if (!s.m.same_shape(param))
    throw InternalError("adam: \"" + name + "\" reused with shape " + shape_str(param.shape()) +
                        " but state is " + shape_str(s.m.shape()));
  ++s.t;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(s.t));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(s.t));
  for (std::size_t i = 0; i < param.size(); ++i) {
    s.m[i] = beta1_ * s.m[i] + (1.0 - beta1_) * grad[i];
    s.v[i] = beta2_ * s.v[i] + (1.0 - beta2_) * grad[i] * grad[i];
    param[i] -= lr_ * (s.m[i] / bc1) / (std::sqrt(s.v[i] / bc2) + eps_);
  }
}

void apply_grads(Optimizer& opt, const std::map<std::string, Tensor>& grads,
                 const ParamWalk& walk) {
  std::size_t applied = 0;
  walk([&](const std::string& name, Tensor& param) {
    auto it = grads.find(name);
    if (it == grads.end()) return;
    opt.step(name, param, it->second);
    ++applied;
  });
  if (applied != grads.size())
    throw InternalError("apply_grads: " + std::to_string(grads.size() - applied) +
                        " gradient entries matched no parameter");
}

void accumulate_grads(std::map<std::string, Tensor>& acc,
                      const std::map<std::string, Tensor>& grads, double scale) {
  for (const auto& [name, g] : grads) {
    auto it = acc.find(name);
    if (it == acc.end()) {
      Tensor scaled = Tensor::zeros(g.shape());
      for (std::size_t i = 0; i < g.size(); ++i) scaled[i] = scale * g[i];
      acc.emplace(name, std::move(scaled));
    } else {
      if (!it->second.same_shape(g))
        throw InternalError("accumulate_grads: shape mismatch for \"" + name + "\"");
      for (std::size_t i = 0; i < g.size(); ++i) it->second[i] += scale * g[i];
    }
  }
}

double cross_entropy_value(const Tensor& logits, const std::vector<int>& targets) {
  if (logits.rank() != 2) throw ShapeError("cross_entropy_value expects [n, C] logits");
  const int n = logits.dim(0), c = logits.dim(1);
  if (static_cast<int>(targets.size()) != n)
    throw ShapeError("cross_entropy_value: " + std::to_string(targets.size()) +
                     " targets for " + std::to_string(n) + " rows");
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const int t = targets[i];
    if (t < 0 || t >= c)
      throw IndexError("cross_entropy_value: target " + std::to_string(t) +
                       " outside " + std::to_string(c) + " classes");
    double m = logits(i, 0);
    for (int j = 1; j < c; ++j) m = std::max(m, logits(i, j));
    double sum = 0.0;
    for (int j = 0; j < c; ++j) sum += std::exp(logits(i, j) - m);
    total += std::log(sum) + m - logits(i, t);
  }
  return total / n;
}

double grad_check(std::map<std::string, Tensor>& params, const LossBuilder& build,
                  double eps) {
  if (eps <= 0.0) throw ConfigError("grad_check: eps must be positive");
  std::map<std::string, Tensor> analytic;
  {
    ad::Tape tape;
    ad::Var loss = build(tape, params);
    tape.backward(loss);
    analytic = tape.named_grads();
  }
  auto eval = [&]() {
    ad::Tape tape;
    return tape.value(build(tape, params)).item();
  };
  double max_rel = 0.0;
  for (auto& [name, p] : params) {
    const Tensor* g = nullptr;
    if (auto it = analytic.find(name); it != analytic.end()) g = &it->second;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double orig = p[i];
      p[i] = orig + eps;
      const double fp = eval();
      p[i] = orig - eps;
      const double fm = eval();
      p[i] = orig;
      const double fd = (fp - fm) / (2.0 * eps);
      const double a = g ? (*g)[i] : 0.0;
      const double rel = std::abs(a - fd) / std::max(1e-8, std::abs(a) + std::abs(fd));
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

namespace {

void shuffle_order(std::vector<int>& order, Rng& rng) {
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[rng.next_below(i)]);
}

// Shared epoch/batch skeleton: build_loss records one sample's loss on a fresh
// tape, eval_loss measures the frozen-weight dataset loss.
TrainStats run_training(int n_samples, const TrainOptions& opts, const ParamWalk& walk,
                        const std::function<ad::Var(ad::Tape&, int, Rng&)>& build_loss,
                        const std::function<double()>& eval_loss) {
  if (n_samples <= 0) throw DataError("training dataset is empty");
  if (opts.epochs <= 0) throw ConfigError("train: epochs must be positive");
  if (opts.batch <= 0) throw ConfigError("train: batch must be positive");

  TrainStats stats;
  stats.initial_loss = eval_loss();

  std::unique_ptr<Optimizer> opt;
  if (opts.adam)
    opt = std::make_unique<Adam>(opts.lr);
  else
    opt = std::make_unique<Sgd>(opts.lr);

  Rng rng(opts.seed);
  Rng shuffle_rng = rng.split();
  Rng dropout_rng = rng.split();

  std::vector<int> order(n_samples);
  std::iota(order.begin(), order.end(), 0);

  bool capped = false;
  for (int epoch = 0; epoch < opts.epochs && !capped; ++epoch) {
    shuffle_order(order, shuffle_rng);
    double epoch_loss = 0.0;
    int seen = 0;
    for (int start = 0; start < n_samples; start += opts.batch) {
      const int bsz = std::min(opts.batch, n_samples - start);
      std::map<std::string, Tensor> acc;
      for (int b = 0; b < bsz; ++b) {
        ad::Tape tape;
        ad::Var loss = build_loss(tape, order[start + b], dropout_rng);
        tape.backward(loss);
        epoch_loss += tape.value(loss).item();
        accumulate_grads(acc, tape.named_grads(), 1.0 / bsz);
      }
      apply_grads(*opt, acc, walk);
      seen += bsz;
      ++stats.steps;
      if (opts.max_steps > 0 && stats.steps >= opts.max_steps) {
        capped = true;
        break;
      }
    }
    if (opts.on_epoch && seen > 0) opts.on_epoch(epoch, epoch_loss / seen);
  }
  stats.final_loss = eval_loss();
  return stats;
}

}  // namespace

TrainStats train_nwp(NwpModel& model, const NwpDataset& data, const TrainOptions& opts) {
  // Per-line loss sums the cross-entropy of every position (full teacher
  // forcing), so longer lines weigh proportionally more.
  return run_training(
      static_cast<int>(data.lines.size()), opts,
      [&](const ParamVisitor& f) { model.visit_params(f); },
      [&](ad::Tape& tape, int idx, Rng& rng) {
        const auto& tokens = data.lines[static_cast<std::size_t>(idx)];
        ad::Binder bind(tape);
        ad::Var logits = model.forward_on(bind, tokens, &rng, true);
        return tape.scale(tape.cross_entropy(logits, tokens),
                          static_cast<double>(tokens.size()));
      },
      [&] { return mean_loss_nwp(model, data); });
}

TrainStats train_intent_slot(IntentSlotModel& model, const IntentSlotDataset& data,
                             const TrainOptions& opts) {
  return run_training(
      static_cast<int>(data.samples.size()), opts,
      [&](const ParamVisitor& f) { model.visit_params(f); },
      [&](ad::Tape& tape, int idx, Rng& rng) {
        const auto& s = data.samples[static_cast<std::size_t>(idx)];
        ad::Binder bind(tape);
        auto logits = model.forward_on(bind, s.input, &rng, true);
        ad::Var intent_ce = tape.cross_entropy(logits.intent, {s.intent});
        ad::Var slot_ce = tape.cross_entropy(logits.slots, s.slots);
        return tape.add(intent_ce, slot_ce);
      },
      [&] { return mean_loss_intent_slot(model, data); });
}

TrainStats train_doc_class(DocClassModel& model, const DocClassDataset& data,
                           const TrainOptions& opts) {
  return run_training(
      static_cast<int>(data.docs.size()), opts,
      [&](const ParamVisitor& f) { model.visit_params(f); },
      [&](ad::Tape& tape, int idx, Rng& rng) {
        const auto& doc = data.docs[static_cast<std::size_t>(idx)];
        ad::Binder bind(tape);
        ad::Var logits = model.forward_on(bind, doc.bytes, &rng, true);
        return tape.cross_entropy(logits, {doc.label});
      },
      [&] { return mean_loss_doc_class(model, data); });
}

double mean_loss_nwp(const NwpModel& model, const NwpDataset& data) {
  double total = 0.0;
  std::uint64_t n = 0;
  for (const auto& line : data.lines) {
    if (line.empty()) continue;
    total += cross_entropy_value(model.nwp_forward(line), line) * line.size();
    n += line.size();
  }
  if (n == 0) throw DataError("mean_loss_nwp: no tokens");
  return total / static_cast<double>(n);
}

double mean_loss_intent_slot(const IntentSlotModel& model, const IntentSlotDataset& data) {
  if (data.samples.empty()) throw DataError("mean_loss_intent_slot: no samples");
  double total = 0.0;
  for (const auto& s : data.samples) {
    const IntentSlotLogits out = model.forward(s.input);
    const Tensor intent2 = out.intent.reshaped({1, out.intent.dim(0)});
    total += cross_entropy_value(intent2, {s.intent});
    total += cross_entropy_value(out.slots, s.slots);
  }
  return total / static_cast<double>(data.samples.size());
}

double mean_loss_doc_class(const DocClassModel& model, const DocClassDataset& data) {
  if (data.docs.empty()) throw DataError("mean_loss_doc_class: no documents");
  double total = 0.0;
  for (const auto& doc : data.docs) {
    const Tensor logits = model.forward(doc.bytes);
    total += cross_entropy_value(logits.reshaped({1, logits.dim(0)}), {doc.label});
  }
  return total / static_cast<double>(data.docs.size());
}

}  // namespace fcnv
