#pragma once

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fcnv/nn_ops.hpp"
#include "fcnv/tensor.hpp"

namespace fcnv::ad {

class Tape;

// Handle to a node on a tape; cheap to copy.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  bool valid() const { return tape != nullptr && id >= 0; }
  const Tensor& value() const;
};

// Reverse-mode gradient tape. Forward ops append nodes holding the computed
// value plus a closure that scatters the node's gradient into its parents;
// backward() walks the nodes in reverse creation order, which is a
// topological order by construction. Named leaves are the trainable
// parameters; after backward() every leaf has a gradient entry (zero when
// the loss never touched it).
class Tape {
 public:
  using BackFn = std::function<void(Tape&, int self)>;

  Var leaf(Tensor value, std::string name = {});
  // Generic extension point: value plus a custom backward closure.
  Var custom(Tensor value, std::vector<Var> parents, BackFn back);

  Var matmul(Var a, Var b);
  Var transpose(Var x);
  Var add(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var x, double k);
  Var reshape(Var x, Shape shape);
  Var concat_rows(const std::vector<Var>& xs);
  Var concat_cols(const std::vector<Var>& xs);
  Var conv1d(Var x, Var filters, std::optional<Var> bias, const ConvSpec& spec);
  Var depthwise_conv1d(Var x, Var kernels, Padding padding);
  Var pointwise_conv1d(Var x, Var w, std::optional<Var> bias);
  Var activate(Var x, const ActivationKind& kind);
  Var pool_time(Var x, PoolKind kind);
  Var embedding_lookup(Var table, std::vector<int> ids);
  Var linear(Var x, Var w, std::optional<Var> bias);
  Var dropout(Var x, double p, Rng& rng, bool training);
  // Mean over rows of -log softmax(logits)[target]; max-stabilized.
  Var cross_entropy(Var logits, std::vector<int> targets);
  // sum(x * weights), a scalar probe used by gradient checks.
  Var weighted_sum(Var x, Tensor weights);

  // Seeds d(loss)/d(loss) = 1 and accumulates gradients for every node.
  void backward(Var loss);

  const Tensor& value(Var v) const;
  const Tensor& value(int id) const;
  // Valid after backward(); zero tensor for untouched nodes.
  const Tensor& grad(Var v) const;
  // Gradients of all named leaves, keyed by name.
  std::map<std::string, Tensor> named_grads() const;

  void accumulate(int id, const Tensor& g);
  std::size_t size() const { return nodes_.size(); }

  // For custom backward closures: a node's accumulated output gradient and
  // its parent ids.
  const Tensor& grad_of(int id) const;
  const std::vector<int>& parents_of(int id) const;

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::vector<int> parents;
    BackFn back;
    std::string name;
  };

  Var push(Tensor value, std::vector<int> parents, BackFn back, std::string name);
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }

  std::deque<Node> nodes_;
  bool ran_backward_ = false;
};

// Memoizes leaf creation by parameter name, so a weight used twice in one
// forward pass (tied embedding factors) binds to a single node and its
// gradient accumulates in one place.
class Binder {
 public:
  explicit Binder(Tape& tape) : tape_(&tape) {}

  Var operator()(const std::string& name, const Tensor& value) {
    auto it = bound_.find(name);
    if (it != bound_.end()) return it->second;
    Var v = tape_->leaf(value, name);
    bound_.emplace(name, v);
    return v;
  }

  Tape& tape() { return *tape_; }

 private:
  Tape* tape_;
  std::map<std::string, Var> bound_;
};

}  // namespace fcnv::ad
