#include "fcnv/autodiff.hpp"

#include <cmath>
#include <utility>

namespace fcnv::ad {

const Tensor& Var::value() const { return tape->value(*this); }

Var Tape::push(Tensor value, std::vector<int> parents, BackFn back, std::string name) {
  if (ran_backward_) throw InternalError("tape reused after backward()");
  Node n;
  n.value = std::move(value);
  n.parents = std::move(parents);
  n.back = std::move(back);
  n.name = std::move(name);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::leaf(Tensor value, std::string name) {
  return push(std::move(value), {}, nullptr, std::move(name));
}

Var Tape::custom(Tensor value, std::vector<Var> parents, BackFn back) {
  std::vector<int> ids;
  ids.reserve(parents.size());
  for (const Var& p : parents) {
    if (p.tape != this) throw InternalError("var from another tape");
    ids.push_back(p.id);
  }
  return push(std::move(value), std::move(ids), std::move(back), {});
}

const Tensor& Tape::value(Var v) const { return node(v.id).value; }
const Tensor& Tape::value(int id) const { return node(id).value; }

const Tensor& Tape::grad(Var v) const {
  if (!ran_backward_) throw InternalError("grad() before backward()");
  return node(v.id).grad;
}

std::map<std::string, Tensor> Tape::named_grads() const {
  if (!ran_backward_) throw InternalError("named_grads() before backward()");
  std::map<std::string, Tensor> out;
  for (const Node& n : nodes_) {
    if (n.name.empty()) continue;
    if (!out.emplace(n.name, n.grad).second) {
      throw InternalError("two leaves named '" + n.name + "' on one tape");
    }
  }
  return out;
}

const Tensor& Tape::grad_of(int id) const { return node(id).grad; }

const std::vector<int>& Tape::parents_of(int id) const { return node(id).parents; }

void Tape::accumulate(int id, const Tensor& g) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (!n.grad.same_shape(g)) {
    throw InternalError("gradient shaped " + shape_str(g.shape()) + " for node shaped " +
                        shape_str(n.value.shape()));
  }
  for (std::size_t i = 0; i < g.size(); ++i) n.grad[i] += g[i];
}

void Tape::backward(Var loss) {
  if (loss.tape != this) throw InternalError("loss from another tape");
  if (node(loss.id).value.size() != 1) throw InternalError("backward() needs a scalar loss");
  for (Node& n : nodes_) n.grad = Tensor(n.value.shape());
  ran_backward_ = true;
  nodes_[static_cast<std::size_t>(loss.id)].grad[0] = 1.0;
  for (int id = static_cast<int>(nodes_.size()) - 1; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.back) n.back(*this, id);
  }
}

Var Tape::matmul(Var a, Var b) {
  Tensor y = fcnv::matmul(value(a), value(b));
  return custom(std::move(y), {a, b}, [](Tape& t, int self) {
    const auto& n = t.node(self);
    const int a = n.parents[0], b = n.parents[1];
    t.accumulate(a, fcnv::matmul(n.grad, fcnv::transpose(t.value(b))));
    t.accumulate(b, fcnv::matmul(fcnv::transpose(t.value(a)), n.grad));
  });
}

Var Tape::transpose(Var x) {
  return custom(fcnv::transpose(value(x)), {x}, [](Tape& t, int self) {
    const auto& n = t.node(self);
    t.accumulate(n.parents[0], fcnv::transpose(n.grad));
  });
}

Var Tape::add(Var a, Var b) {
  return custom(fcnv::add(value(a), value(b)), {a, b}, [](Tape& t, int self) {
    const auto& n = t.node(self);
    t.accumulate(n.parents[0], n.grad);
    t.accumulate(n.parents[1], n.grad);
  });
}

Var Tape::mul(Var a, Var b) {
  return custom(fcnv::mul(value(a), value(b)), {a, b}, [](Tape& t, int self) {
    const auto& n = t.node(self);
    t.accumulate(n.parents[0], fcnv::mul(n.grad, t.value(n.parents[1])));
    t.accumulate(n.parents[1], fcnv::mul(n.grad, t.value(n.parents[0])));
  });
}

Var Tape::scale(Var x, double k) {
  Tensor y = value(x);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= k;
  return custom(std::move(y), {x}, [k](Tape& t, int self) {
    const auto& n = t.node(self);
    Tensor g = n.grad;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] *= k;
    t.accumulate(n.parents[0], g);
  });
}

Var Tape::reshape(Var x, Shape shape) {
  Shape from = value(x).shape();
  return custom(value(x).reshaped(std::move(shape)), {x}, [from](Tape& t, int self) {
    const auto& n = t.node(self);
    t.accumulate(n.parents[0], n.grad.reshaped(from));
  });
}

Var Tape::concat_rows(const std::vector<Var>& xs) {
  std::vector<Tensor> vals;
  std::vector<int> splits;
  vals.reserve(xs.size());
  for (const Var& x : xs) {
    vals.push_back(value(x));
    splits.push_back(value(x).dim(0));
  }
  return custom(fcnv::concat_rows(vals), xs, [splits](Tape& t, int self) {
    const auto& n = t.node(self);
    const int cols = n.grad.dim(1);
    int at = 0;
    for (std::size_t i = 0; i < splits.size(); ++i) {
      Tensor g({splits[i], cols});
      for (int r = 0; r < splits[i]; ++r) {
        for (int c = 0; c < cols; ++c) g(r, c) = n.grad(at + r, c);
      }
      t.accumulate(n.parents[i], g);
      at += splits[i];
    }
  });
}

Var Tape::concat_cols(const std::vector<Var>& xs) {
  std::vector<Tensor> vals;
  std::vector<int> splits;
  vals.reserve(xs.size());
  for (const Var& x : xs) {
    vals.push_back(value(x));
    splits.push_back(value(x).dim(1));
  }
  return custom(fcnv::concat_cols(vals), xs, [splits](Tape& t, int self) {
    const auto& n = t.node(self);
    const int rows = n.grad.dim(0);
    int at = 0;
    for (std::size_t i = 0; i < splits.size(); ++i) {
      Tensor g({rows, splits[i]});
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < splits[i]; ++c) g(r, c) = n.grad(r, at + c);
      }
      t.accumulate(n.parents[i], g);
      at += splits[i];
    }
  });
}

Var Tape::conv1d(Var x, Var filters, std::optional<Var> bias, const ConvSpec& spec) {
  ConvParams p{spec, value(filters), bias ? std::optional<Tensor>(value(*bias)) : std::nullopt};
  Tensor y = fcnv::conv1d(value(x), p);
  std::vector<Var> parents{x, filters};
  if (bias) parents.push_back(*bias);
  return custom(std::move(y), parents, [spec, has_bias = bias.has_value()](Tape& t, int self) {
    const auto& n = t.node(self);
    ConvParams p{spec, t.value(n.parents[1]),
                 has_bias ? std::optional<Tensor>(t.value(n.parents[2])) : std::nullopt};
    ConvGrads g = conv1d_backward(t.value(n.parents[0]), p, n.grad);
    t.accumulate(n.parents[0], g.x);
    t.accumulate(n.parents[1], g.filters);
    if (has_bias) t.accumulate(n.parents[2], *g.bias);
  });
}

Var Tape::depthwise_conv1d(Var x, Var kernels, Padding padding) {
  Tensor y = fcnv::depthwise_conv1d(value(x), value(kernels), padding);
  return custom(std::move(y), {x, kernels}, [padding](Tape& t, int self) {
    const auto& n = t.node(self);
    DepthwiseGrads g = depthwise_conv1d_backward(t.value(n.parents[0]), t.value(n.parents[1]),
                                                 padding, n.grad);
    t.accumulate(n.parents[0], g.x);
    t.accumulate(n.parents[1], g.kernels);
  });
}

Var Tape::pointwise_conv1d(Var x, Var w, std::optional<Var> bias) {
  Tensor y = fcnv::pointwise_conv1d(value(x), value(w), bias ? &value(*bias) : nullptr);
  std::vector<Var> parents{x, w};
  if (bias) parents.push_back(*bias);
  return custom(std::move(y), parents, [has_bias = bias.has_value()](Tape& t, int self) {
    const auto& n = t.node(self);
    ConvGrads g =
        pointwise_conv1d_backward(t.value(n.parents[0]), t.value(n.parents[1]), has_bias, n.grad);
    t.accumulate(n.parents[0], g.x);
    t.accumulate(n.parents[1], g.filters);
    if (has_bias) t.accumulate(n.parents[2], *g.bias);
  });
}

Var Tape::activate(Var x, const ActivationKind& kind) {
  Tensor y = fcnv::activate(value(x), kind);
  return custom(std::move(y), {x}, [kind](Tape& t, int self) {
    const auto& n = t.node(self);
    t.accumulate(n.parents[0], activate_backward(t.value(n.parents[0]), kind, n.grad));
  });
}

Var Tape::pool_time(Var x, PoolKind kind) {
  Tensor y = fcnv::pool_time(value(x), kind);
  return custom(std::move(y), {x}, [kind](Tape& t, int self) {
    const auto& n = t.node(self);
    t.accumulate(n.parents[0], pool_time_backward(t.value(n.parents[0]), kind, n.grad));
  });
}

Var Tape::embedding_lookup(Var table, std::vector<int> ids) {
  Tensor y = fcnv::embedding_lookup(value(table), ids);
  return custom(std::move(y), {table}, [ids = std::move(ids)](Tape& t, int self) {
    const auto& n = t.node(self);
    const Tensor& table = t.value(n.parents[0]);
    t.accumulate(n.parents[0],
                 embedding_lookup_backward(table.dim(0), table.dim(1), ids, n.grad));
  });
}

Var Tape::linear(Var x, Var w, std::optional<Var> bias) {
  Tensor y = fcnv::linear(value(x), value(w), bias ? &value(*bias) : nullptr);
  std::vector<Var> parents{x, w};
  if (bias) parents.push_back(*bias);
  return custom(std::move(y), parents, [has_bias = bias.has_value()](Tape& t, int self) {
    const auto& n = t.node(self);
    LinearGrads g =
        linear_backward(t.value(n.parents[0]), t.value(n.parents[1]), has_bias, n.grad);
    t.accumulate(n.parents[0], g.x);
    t.accumulate(n.parents[1], g.w);
    if (has_bias) t.accumulate(n.parents[2], *g.bias);
  });
}

Var Tape::dropout(Var x, double p, Rng& rng, bool training) {
  DropoutResult r = fcnv::dropout(value(x), p, rng, training);
  return custom(std::move(r.output), {x}, [mask = std::move(r.mask)](Tape& t, int self) {
    const auto& n = t.node(self);
    t.accumulate(n.parents[0], fcnv::mul(n.grad, mask));
  });
}

Var Tape::cross_entropy(Var logits, std::vector<int> targets) {
  const Tensor& z = value(logits);
  if (z.rank() != 2 || static_cast<std::size_t>(z.dim(0)) != targets.size()) {
    throw ShapeError("cross_entropy logits shaped " + shape_str(z.shape()) + " for " +
                     std::to_string(targets.size()) + " targets");
  }
  const int n_rows = z.dim(0), classes = z.dim(1);
  for (int tgt : targets) {
    if (tgt < 0 || tgt >= classes) {
      throw IndexError("cross_entropy target " + std::to_string(tgt) + " outside [0, " +
                       std::to_string(classes) + ")");
    }
  }
  double loss = 0.0;
  for (int i = 0; i < n_rows; ++i) {
    double mx = z(i, 0);
    for (int j = 1; j < classes; ++j) mx = std::max(mx, z(i, j));
    double sum = 0.0;
    for (int j = 0; j < classes; ++j) sum += std::exp(z(i, j) - mx);
    loss += std::log(sum) + mx - z(i, targets[static_cast<std::size_t>(i)]);
  }
  loss /= n_rows;
  return custom(Tensor::scalar(loss), {logits}, [targets = std::move(targets)](Tape& t, int self) {
    const auto& n = t.node(self);
    const Tensor& z = t.value(n.parents[0]);
    const int n_rows = z.dim(0), classes = z.dim(1);
    const double gy = n.grad[0] / n_rows;
    Tensor g(z.shape());
    for (int i = 0; i < n_rows; ++i) {
      double mx = z(i, 0);
      for (int j = 1; j < classes; ++j) mx = std::max(mx, z(i, j));
      double sum = 0.0;
      for (int j = 0; j < classes; ++j) sum += std::exp(z(i, j) - mx);
      for (int j = 0; j < classes; ++j) {
        double soft = std::exp(z(i, j) - mx) / sum;
        g(i, j) = gy * (soft - (j == targets[static_cast<std::size_t>(i)] ? 1.0 : 0.0));
      }
    }
    t.accumulate(n.parents[0], g);
  });
}

Var Tape::weighted_sum(Var x, Tensor weights) {
  const Tensor& v = value(x);
  if (!v.same_shape(weights)) throw ShapeError("weighted_sum weights shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) acc += v[i] * weights[i];
  return custom(Tensor::scalar(acc), {x}, [w = std::move(weights)](Tape& t, int self) {
    const auto& n = t.node(self);
    Tensor g = w;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] *= n.grad[0];
    t.accumulate(n.parents[0], g);
  });
}

}  // namespace fcnv::ad
