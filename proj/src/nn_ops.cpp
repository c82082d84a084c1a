#include "fcnv/nn_ops.hpp"

#include <cmath>
#include <string>

namespace fcnv {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
}  // namespace

const char* padding_name(Padding p) {
  switch (p) {
    case Padding::kSame:
      return "same";
    case Padding::kCausal:
      return "causal";
    case Padding::kNone:
      return "none";
    case Padding::kFull:
      return "full";
  }
  return "?";
}

Padding padding_from_name(const std::string& name) {
  if (name == "same") return Padding::kSame;
  if (name == "causal") return Padding::kCausal;
  if (name == "none") return Padding::kNone;
  if (name == "full") return Padding::kFull;
  throw ConfigError("unknown padding mode '" + name + "'");
}

int ConvSpec::pad_left() const {
  switch (padding) {
    case Padding::kSame:
      return (kernel - 1) / 2;
    case Padding::kCausal:
      return kernel - 1;
    case Padding::kNone:
      return 0;
    case Padding::kFull:
      return kernel - 1;
  }
  return 0;
}

int ConvSpec::pad_right() const {
  switch (padding) {
    case Padding::kSame:
      return kernel - 1 - (kernel - 1) / 2;
    case Padding::kCausal:
      return 0;
    case Padding::kNone:
      return 0;
    case Padding::kFull:
      return kernel - 1;
  }
  return 0;
}

int ConvSpec::out_len(int t) const {
  int padded = t + pad_left() + pad_right();
  int len = (padded - kernel) / stride + 1;
  if (padded < kernel || len < 1) {
    throw ShapeError("conv geometry yields no output: t=" + std::to_string(t) + " k=" +
                     std::to_string(kernel) + " stride=" + std::to_string(stride) + " padding=" +
                     padding_name(padding));
  }
  return len;
}

void ConvSpec::validate() const {
  if (in_channels < 1 || out_channels < 1 || kernel < 1 || groups < 1 || stride < 1) {
    throw ConfigError("conv spec fields must be positive");
  }
  if (in_channels % groups != 0 || out_channels % groups != 0) {
    throw ConfigError("channels not divisible by groups: in=" + std::to_string(in_channels) +
                      " out=" + std::to_string(out_channels) + " g=" + std::to_string(groups));
  }
}

void ConvParams::validate() const {
  spec.validate();
  Shape want{spec.out_channels, spec.in_channels / spec.groups, spec.kernel};
  if (filters.shape() != want) {
    throw ShapeError("conv filters shaped " + shape_str(filters.shape()) + ", spec requires " +
                     shape_str(want));
  }
  if (bias && bias->shape() != Shape{spec.out_channels}) {
    throw ShapeError("conv bias shaped " + shape_str(bias->shape()) + ", spec requires [" +
                     std::to_string(spec.out_channels) + "]");
  }
}

void BottleneckParams::validate() const {
  down.validate();
  up.validate();
  if (down.spec.kernel != 1 || up.spec.kernel != 1) {
    throw ConfigError("bottleneck pair must be pointwise (kernel 1)");
  }
  if (down.spec.out_channels != bottleneck || up.spec.in_channels != bottleneck) {
    throw ShapeError("bottleneck width mismatch: down out=" +
                     std::to_string(down.spec.out_channels) + " up in=" +
                     std::to_string(up.spec.in_channels) + " b=" + std::to_string(bottleneck));
  }
  if (down.spec.in_channels != up.spec.out_channels) {
    throw ShapeError("bottleneck pair must map c back to c");
  }
  if (2 * bottleneck >= down.spec.in_channels) {
    warn("bottleneck width " + std::to_string(bottleneck) + " with c=" +
         std::to_string(down.spec.in_channels) + " does not reduce parameters (2b >= c)");
  }
}

Tensor conv1d(const Tensor& x, const ConvParams& params) {
  params.validate();
  const ConvSpec& s = params.spec;
  if (x.rank() != 2 || x.dim(0) != s.in_channels) {
    throw ShapeError("conv input shaped " + shape_str(x.shape()) + ", spec expects " +
                     std::to_string(s.in_channels) + " channels");
  }
  const int t = x.dim(1);
  const int t_out = s.out_len(t);
  const int cg = s.in_channels / s.groups;
  const int og = s.out_channels / s.groups;
  const int pad = s.pad_left();

  Tensor y({s.out_channels, t_out});
  for (int o = 0; o < s.out_channels; ++o) {
    const int base_in = (o / og) * cg;
    const double b = params.bias ? (*params.bias)[static_cast<std::size_t>(o)] : 0.0;
    for (int tau = 0; tau < t_out; ++tau) {
      const int start = tau * s.stride - pad;
      double acc = b;
      for (int i = 0; i < cg; ++i) {
        const double* xr = x.data() + static_cast<std::size_t>(base_in + i) * t;
        const double* f =
            params.filters.data() + (static_cast<std::size_t>(o) * cg + i) * s.kernel;
        for (int kk = 0; kk < s.kernel; ++kk) {
          const int pos = start + kk;
          if (pos >= 0 && pos < t) acc += f[kk] * xr[pos];
        }
      }
      y(o, tau) = acc;
    }
  }
  return y;
}

ConvGrads conv1d_backward(const Tensor& x, const ConvParams& params, const Tensor& grad_out) {
  const ConvSpec& s = params.spec;
  const int t = x.dim(1);
  const int t_out = s.out_len(t);
  if (grad_out.shape() != Shape{s.out_channels, t_out}) {
    throw ShapeError("conv grad_out shaped " + shape_str(grad_out.shape()));
  }
  const int cg = s.in_channels / s.groups;
  const int og = s.out_channels / s.groups;
  const int pad = s.pad_left();

  ConvGrads g;
  g.x = Tensor(x.shape());
  g.filters = Tensor(params.filters.shape());
  if (params.bias) g.bias = Tensor({s.out_channels});

  for (int o = 0; o < s.out_channels; ++o) {
    const int base_in = (o / og) * cg;
    for (int tau = 0; tau < t_out; ++tau) {
      const double gy = grad_out(o, tau);
      if (gy == 0.0) continue;
      const int start = tau * s.stride - pad;
      for (int i = 0; i < cg; ++i) {
        const double* xr = x.data() + static_cast<std::size_t>(base_in + i) * t;
        double* gxr = g.x.data() + static_cast<std::size_t>(base_in + i) * t;
        const std::size_t fo = (static_cast<std::size_t>(o) * cg + i) * s.kernel;
        for (int kk = 0; kk < s.kernel; ++kk) {
          const int pos = start + kk;
          if (pos < 0 || pos >= t) continue;
          g.filters[fo + kk] += gy * xr[pos];
          gxr[pos] += gy * params.filters[fo + kk];
        }
      }
    }
  }
  if (g.bias) {
    for (int o = 0; o < s.out_channels; ++o) {
      double acc = 0.0;
      for (int tau = 0; tau < t_out; ++tau) acc += grad_out(o, tau);
      (*g.bias)[static_cast<std::size_t>(o)] = acc;
    }
  }
  return g;
}

Tensor depthwise_conv1d(const Tensor& x, const Tensor& kernels, Padding padding) {
  if (x.rank() != 2 || kernels.rank() != 2 || kernels.dim(0) != x.dim(0)) {
    throw ShapeError("depthwise kernels shaped " + shape_str(kernels.shape()) + " for input " +
                     shape_str(x.shape()));
  }
  const int c = x.dim(0), t = x.dim(1), k = kernels.dim(1);
  ConvSpec s{c, c, k, c, 1, padding};
  const int t_out = s.out_len(t);
  const int pad = s.pad_left();
  Tensor y({c, t_out});
  for (int j = 0; j < c; ++j) {
    const double* xr = x.data() + static_cast<std::size_t>(j) * t;
    const double* f = kernels.data() + static_cast<std::size_t>(j) * k;
    for (int tau = 0; tau < t_out; ++tau) {
      const int start = tau - pad;
      double acc = 0.0;
      for (int kk = 0; kk < k; ++kk) {
        const int pos = start + kk;
        if (pos >= 0 && pos < t) acc += f[kk] * xr[pos];
      }
      y(j, tau) = acc;
    }
  }
  return y;
}

DepthwiseGrads depthwise_conv1d_backward(const Tensor& x, const Tensor& kernels, Padding padding,
                                         const Tensor& grad_out) {
  const int c = x.dim(0), t = x.dim(1), k = kernels.dim(1);
  ConvSpec s{c, c, k, c, 1, padding};
  const int t_out = s.out_len(t);
  if (grad_out.shape() != Shape{c, t_out}) {
    throw ShapeError("depthwise grad_out shaped " + shape_str(grad_out.shape()));
  }
  const int pad = s.pad_left();
  DepthwiseGrads g{Tensor(x.shape()), Tensor(kernels.shape())};
  for (int j = 0; j < c; ++j) {
    const double* xr = x.data() + static_cast<std::size_t>(j) * t;
    const double* f = kernels.data() + static_cast<std::size_t>(j) * k;
    double* gxr = g.x.data() + static_cast<std::size_t>(j) * t;
    double* gf = g.kernels.data() + static_cast<std::size_t>(j) * k;
    for (int tau = 0; tau < t_out; ++tau) {
      const double gy = grad_out(j, tau);
      if (gy == 0.0) continue;
      const int start = tau - pad;
      for (int kk = 0; kk < k; ++kk) {
        const int pos = start + kk;
        if (pos < 0 || pos >= t) continue;
        gf[kk] += gy * xr[pos];
        gxr[pos] += gy * f[kk];
      }
    }
  }
  return g;
}

Tensor pointwise_conv1d(const Tensor& x, const Tensor& w, const Tensor* bias) {
  if (x.rank() != 2 || w.rank() != 2 || w.dim(1) != x.dim(0)) {
    throw ShapeError("pointwise weights shaped " + shape_str(w.shape()) + " for input " +
                     shape_str(x.shape()));
  }
  Tensor y = matmul(w, x);
  if (bias) {
    if (bias->shape() != Shape{w.dim(0)}) {
      throw ShapeError("pointwise bias shaped " + shape_str(bias->shape()));
    }
    const int t = y.dim(1);
    for (int o = 0; o < y.dim(0); ++o) {
      const double b = (*bias)[static_cast<std::size_t>(o)];
      for (int tau = 0; tau < t; ++tau) y(o, tau) += b;
    }
  }
  return y;
}

ConvGrads pointwise_conv1d_backward(const Tensor& x, const Tensor& w, bool has_bias,
                                    const Tensor& grad_out) {
  ConvGrads g;
  g.x = matmul(transpose(w), grad_out);
  g.filters = matmul(grad_out, transpose(x));
  if (has_bias) {
    Tensor b({w.dim(0)});
    for (int o = 0; o < grad_out.dim(0); ++o) {
      double acc = 0.0;
      for (int tau = 0; tau < grad_out.dim(1); ++tau) acc += grad_out(o, tau);
      b[static_cast<std::size_t>(o)] = acc;
    }
    g.bias = std::move(b);
  }
  return g;
}

Tensor bottleneck_pointwise(const Tensor& x, const BottleneckParams& params) {
  params.validate();
  // ConvParams keep the canonical [out, in, 1] filter shape; the kernel axis
  // is flattened away for the per-timestep matmul.
  const ConvSpec& d = params.down.spec;
  const ConvSpec& u = params.up.spec;
  Tensor mid = pointwise_conv1d(x, params.down.filters.reshaped({d.out_channels, d.in_channels}),
                                params.down.bias ? &*params.down.bias : nullptr);
  return pointwise_conv1d(mid, params.up.filters.reshaped({u.out_channels, u.in_channels}),
                          params.up.bias ? &*params.up.bias : nullptr);
}

double sigmoid_scalar(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double gelu_scalar(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double gelu_grad_scalar(double x) {
  double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
  double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
  return cdf + x * pdf;
}

namespace {

double act_scalar(double v, const ActivationKind& k) {
  switch (k.act) {
    case Act::kRelu:
      return v > 0.0 ? v : 0.0;
    case Act::kLeakyRelu:
      return v > 0.0 ? v : k.leaky_slope * v;
    case Act::kElu:
      return v > 0.0 ? v : k.elu_alpha * (std::exp(v) - 1.0);
    case Act::kGelu:
      return gelu_scalar(v);
    case Act::kSigmoid:
      return sigmoid_scalar(v);
    case Act::kGlu:
      break;
  }
  throw InternalError("glu is not elementwise");
}

double act_grad_scalar(double v, const ActivationKind& k) {
  switch (k.act) {
    case Act::kRelu:
      return v > 0.0 ? 1.0 : 0.0;
    case Act::kLeakyRelu:
      return v > 0.0 ? 1.0 : k.leaky_slope;
    case Act::kElu:
      return v > 0.0 ? 1.0 : k.elu_alpha * std::exp(v);
    case Act::kGelu:
      return gelu_grad_scalar(v);
    case Act::kSigmoid: {
      double s = sigmoid_scalar(v);
      return s * (1.0 - s);
    }
    case Act::kGlu:
      break;
  }
  throw InternalError("glu is not elementwise");
}

}  // namespace

Tensor activate(const Tensor& x, const ActivationKind& kind) {
  if (kind.act == Act::kGlu) {
    if (x.rank() != 2 || x.dim(0) % 2 != 0) {
      throw ShapeError("glu requires an even channel count, got " + shape_str(x.shape()));
    }
    const int h = x.dim(0) / 2, t = x.dim(1);
    Tensor y({h, t});
    for (int j = 0; j < h; ++j) {
      for (int tau = 0; tau < t; ++tau) {
        y(j, tau) = x(j, tau) * sigmoid_scalar(x(j + h, tau));
      }
    }
    return y;
  }
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = act_scalar(x[i], kind);
  return y;
}

Tensor activate_backward(const Tensor& x, const ActivationKind& kind, const Tensor& grad_out) {
  if (kind.act == Act::kGlu) {
    const int h = x.dim(0) / 2, t = x.dim(1);
    if (grad_out.shape() != Shape{h, t}) {
      throw ShapeError("glu grad_out shaped " + shape_str(grad_out.shape()));
    }
    Tensor gx(x.shape());
    for (int j = 0; j < h; ++j) {
      for (int tau = 0; tau < t; ++tau) {
        const double a = x(j, tau);
        const double s = sigmoid_scalar(x(j + h, tau));
        const double gy = grad_out(j, tau);
        gx(j, tau) = gy * s;
        gx(j + h, tau) = gy * a * s * (1.0 - s);
      }
    }
    return gx;
  }
  if (!grad_out.same_shape(x)) {
    throw ShapeError("activation grad_out shaped " + shape_str(grad_out.shape()));
  }
  Tensor gx(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) gx[i] = grad_out[i] * act_grad_scalar(x[i], kind);
  return gx;
}

Tensor pool_time(const Tensor& x, PoolKind kind) {
  if (kind == PoolKind::kMax) return pool_time_max_argmax(x, nullptr);
  if (x.rank() != 2 || x.dim(1) < 1) {
    throw ShapeError("pool_time requires [c, t] with t >= 1, got " + shape_str(x.shape()));
  }
  const int c = x.dim(0), t = x.dim(1);
  Tensor y({c});
  for (int j = 0; j < c; ++j) {
    double acc = 0.0;
    for (int tau = 0; tau < t; ++tau) acc += x(j, tau);
    y[static_cast<std::size_t>(j)] = acc / t;
  }
  return y;
}

Tensor pool_time_max_argmax(const Tensor& x, std::vector<int>* argmax) {
  if (x.rank() != 2 || x.dim(1) < 1) {
    throw ShapeError("pool_time requires [c, t] with t >= 1, got " + shape_str(x.shape()));
  }
  const int c = x.dim(0), t = x.dim(1);
  Tensor y({c});
  if (argmax) argmax->assign(static_cast<std::size_t>(c), 0);
  for (int j = 0; j < c; ++j) {
    double best = x(j, 0);
    int best_at = 0;
    for (int tau = 1; tau < t; ++tau) {
      if (x(j, tau) > best) {
        best = x(j, tau);
        best_at = tau;
      }
    }
    y[static_cast<std::size_t>(j)] = best;
    if (argmax) (*argmax)[static_cast<std::size_t>(j)] = best_at;
  }
  return y;
}

Tensor pool_time_backward(const Tensor& x, PoolKind kind, const Tensor& grad_out) {
  const int c = x.dim(0), t = x.dim(1);
  if (grad_out.shape() != Shape{c}) {
    throw ShapeError("pool grad_out shaped " + shape_str(grad_out.shape()));
  }
  Tensor gx(x.shape());
  if (kind == PoolKind::kAvg) {
    for (int j = 0; j < c; ++j) {
      const double g = grad_out[static_cast<std::size_t>(j)] / t;
      for (int tau = 0; tau < t; ++tau) gx(j, tau) = g;
    }
    return gx;
  }
  std::vector<int> argmax;
  pool_time_max_argmax(x, &argmax);
  for (int j = 0; j < c; ++j) {
    gx(j, argmax[static_cast<std::size_t>(j)]) = grad_out[static_cast<std::size_t>(j)];
  }
  return gx;
}

Tensor embedding_lookup(const Tensor& table, const std::vector<int>& ids) {
  if (table.rank() != 2) throw ShapeError("embedding table must be rank 2");
  const int v = table.dim(0), d = table.dim(1);
  Tensor y({static_cast<int>(ids.size()), d});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const int id = ids[i];
    if (id < 0 || id >= v) {
      throw IndexError("embedding id " + std::to_string(id) + " outside [0, " +
                       std::to_string(v) + ")");
    }
    const double* row = table.data() + static_cast<std::size_t>(id) * d;
    double* out = y.data() + i * d;
    for (int j = 0; j < d; ++j) out[j] = row[j];
  }
  return y;
}

Tensor embedding_lookup_backward(int vocab, int dim, const std::vector<int>& ids,
                                 const Tensor& grad_out) {
  if (grad_out.shape() != Shape{static_cast<int>(ids.size()), dim}) {
    throw ShapeError("embedding grad_out shaped " + shape_str(grad_out.shape()));
  }
  Tensor g({vocab, dim});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    double* row = g.data() + static_cast<std::size_t>(ids[i]) * dim;
    const double* src = grad_out.data() + i * dim;
    for (int j = 0; j < dim; ++j) row[j] += src[j];
  }
  return g;
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor* bias) {
  Tensor y = matmul(x, w);
  if (bias) {
    if (bias->shape() != Shape{w.dim(1)}) {
      throw ShapeError("linear bias shaped " + shape_str(bias->shape()));
    }
    for (int i = 0; i < y.dim(0); ++i) {
      for (int j = 0; j < y.dim(1); ++j) y(i, j) += (*bias)[static_cast<std::size_t>(j)];
    }
  }
  return y;
}

LinearGrads linear_backward(const Tensor& x, const Tensor& w, bool has_bias,
                            const Tensor& grad_out) {
  LinearGrads g;
  g.x = matmul(grad_out, transpose(w));
  g.w = matmul(transpose(x), grad_out);
  if (has_bias) {
    Tensor b({w.dim(1)});
    for (int i = 0; i < grad_out.dim(0); ++i) {
      for (int j = 0; j < grad_out.dim(1); ++j) b[static_cast<std::size_t>(j)] += grad_out(i, j);
    }
    g.bias = std::move(b);
  }
  return g;
}

}  // namespace fcnv
