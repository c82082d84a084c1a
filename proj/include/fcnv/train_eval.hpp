#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "fcnv/autodiff.hpp"
#include "fcnv/dataset.hpp"
#include "fcnv/task_models.hpp"

namespace fcnv {

class Optimizer {
 public:
  virtual ~Optimizer() = default;
  // One update for one named parameter; optimizers keep per-name state.
  virtual void step(const std::string& name, Tensor& param, const Tensor& grad) = 0;
};

class Sgd : public Optimizer {
 public:
  explicit Sgd(double lr);
  void step(const std::string& name, Tensor& param, const Tensor& grad) override;

 private:
  double lr_;
};

class Adam : public Optimizer {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(const std::string& name, Tensor& param, const Tensor& grad) override;

 private:
  struct State {
    Tensor m, v;
    std::int64_t t = 0;
  };
  double lr_, beta1_, beta2_, eps_;
  std::map<std::string, State> state_;
};

// Walks a model's parameters (same shape as visit_params).
using ParamWalk = std::function<void(const ParamVisitor&)>;

// Applies named gradients to the parameters the walk visits. Parameters the
// tape never touched are left alone; a gradient whose name matches no
// parameter is a wiring bug and throws.
void apply_grads(Optimizer& opt, const std::map<std::string, Tensor>& grads,
                 const ParamWalk& walk);

// acc += scale * grads, inserting missing entries.
void accumulate_grads(std::map<std::string, Tensor>& acc,
                      const std::map<std::string, Tensor>& grads, double scale = 1.0);

// Mean over rows of -log softmax(row)[target], max-stabilized; the pure-tensor
// twin of the tape op.
double cross_entropy_value(const Tensor& logits, const std::vector<int>& targets);

// Builds a scalar loss on `tape` from the parameters currently stored in the
// map, binding each one as a leaf under its map key.
using LossBuilder =
    std::function<ad::Var(ad::Tape&, const std::map<std::string, Tensor>&)>;

// Central finite differences on every element of every parameter; returns the
// maximum relative error |a-b| / max(1e-8, |a|+|b|) against the tape gradient.
double grad_check(std::map<std::string, Tensor>& params, const LossBuilder& build,
                  double eps = 1e-5);

struct TrainOptions {
  int epochs = 1;
  int batch = 8;
  double lr = 1e-3;
  bool adam = true;
  int max_steps = 0;  // stop after this many optimizer steps; 0 = no cap
  std::uint64_t seed = 0;
  std::function<void(int epoch, double mean_loss)> on_epoch;
};

struct TrainStats {
  double initial_loss = 0.0;  // mean loss over the dataset before training
  double final_loss = 0.0;    // and after
  int steps = 0;              // optimizer steps taken
};

// In-place training; sample order is reshuffled per epoch from opts.seed.
TrainStats train_nwp(NwpModel& model, const NwpDataset& data, const TrainOptions& opts);
TrainStats train_intent_slot(IntentSlotModel& model, const IntentSlotDataset& data,
                             const TrainOptions& opts);
TrainStats train_doc_class(DocClassModel& model, const DocClassDataset& data,
                           const TrainOptions& opts);

// Frozen-weight mean losses (pure forwards). NWP is per-token cross-entropy,
// so exp(mean_loss_nwp) is the training-set perplexity.
double mean_loss_nwp(const NwpModel& model, const NwpDataset& data);
double mean_loss_intent_slot(const IntentSlotModel& model, const IntentSlotDataset& data);
double mean_loss_doc_class(const DocClassModel& model, const DocClassDataset& data);

}  // namespace fcnv
