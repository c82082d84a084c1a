#include "fcnv/tensor.hpp"

#include <cmath>
#include <iostream>
#include <sstream>
#include <utility>

namespace fcnv {

namespace {

void default_warning_handler(const std::string& m) {
  std::cerr << "warning: " << m << "\n";
}

std::function<void(const std::string&)>& warning_handler() {
  static std::function<void(const std::string&)> handler = default_warning_handler;
  return handler;
}

}  // namespace

void warn(const std::string& message) { warning_handler()(message); }

// An empty handler restores the default.
void set_warning_handler(std::function<void(const std::string&)> handler) {
  warning_handler() = handler ? std::move(handler) : default_warning_handler;
}

namespace memtrack {

namespace detail {
std::atomic<std::size_t> g_current{0};
std::atomic<std::size_t> g_peak{0};

void add(std::size_t n) {
  std::size_t now = g_current.fetch_add(n) + n;
  std::size_t peak = g_peak.load();
  while (now > peak && !g_peak.compare_exchange_weak(peak, now)) {
  }
}

void sub(std::size_t n) { g_current.fetch_sub(n); }
}  // namespace detail

std::size_t current_bytes() { return detail::g_current.load(); }
std::size_t peak_bytes() { return detail::g_peak.load(); }
void reset_peak() { detail::g_peak.store(detail::g_current.load()); }

}  // namespace memtrack

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) os << "x";
    os << s[i];
  }
  os << "]";
  return os.str();
}

namespace {

std::size_t checked_numel(const Shape& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw ConfigError("tensor dims must be positive, got " + shape_str(shape));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

}  // namespace

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
  data_.assign(checked_numel(shape_), 0.0);
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)) {
  std::size_t n = checked_numel(shape_);
  if (n != data.size()) {
    throw ShapeError("tensor data length " + std::to_string(data.size()) +
                     " does not match shape " + shape_str(shape_));
  }
  data_.assign(data.begin(), data.end());
  if (!all_finite()) throw ShapeError("tensor data contains non-finite values");
}

Tensor Tensor::filled(Shape shape, double v) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t.data_[i] = v;
  return t;
}

Tensor Tensor::scalar(double v) { return filled({1}, v); }

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  int r = static_cast<int>(rows.size());
  int c = r ? static_cast<int>(rows.begin()->size()) : 0;
  Tensor t({r, c});
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != c) throw ShapeError("ragged row literal");
    for (double v : row) t.data_[i++] = v;
  }
  return t;
}

Tensor Tensor::reshaped(Shape shape) const {
  std::size_t n = checked_numel(shape);
  if (n != size()) {
    throw ShapeError("cannot reshape " + shape_str(shape_) + " (" + std::to_string(size()) +
                     " values) to " + shape_str(shape));
  }
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = data_;
  return t;
}

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item() requires a single-element tensor, got " + shape_str(shape_));
  return data_[0];
}

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::uint64_t Rng::next_below(std::uint64_t n) {
  if (n == 0) throw ConfigError("next_below(0)");
  // Rejection sampling keeps the draw unbiased.
  std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v = next_u64();
  while (v >= limit) v = next_u64();
  return v % n;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul shape mismatch: " + shape_str(a.shape()) + " x " +
                     shape_str(b.shape()));
  }
  const int m = a.dim(0), r = a.dim(1), n = b.dim(1);
  Tensor y({m, n});
  const double* pa = a.data();
  const double* pb = b.data();
  double* py = y.data();
  for (int i = 0; i < m; ++i) {
    const double* arow = pa + static_cast<std::size_t>(i) * r;
    double* yrow = py + static_cast<std::size_t>(i) * n;
    for (int kk = 0; kk < r; ++kk) {
      const double av = arow[kk];
      if (av == 0.0) continue;
      const double* brow = pb + static_cast<std::size_t>(kk) * n;
      for (int j = 0; j < n; ++j) yrow[j] += av * brow[j];
    }
  }
  return y;
}

DropoutResult dropout(const Tensor& x, double p, Rng& rng, bool training) {
  if (p < 0.0 || p >= 1.0) {
    throw ConfigError("dropout probability must be in [0,1), got " + std::to_string(p));
  }
  if (!training || p == 0.0) {
    return {x, Tensor::filled(x.shape(), 1.0)};
  }
  const double scale = 1.0 / (1.0 - p);
  Tensor mask(x.shape());
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double keep = rng.next_double() >= p ? scale : 0.0;
    mask[i] = keep;
    y[i] = x[i] * keep;
  }
  return {std::move(y), std::move(mask)};
}

Tensor elementwise(const Tensor& x, const Tensor& y, EwOp op) {
  if (!x.same_shape(y)) {
    throw ShapeError("elementwise shape mismatch: " + shape_str(x.shape()) + " vs " +
                     shape_str(y.shape()));
  }
  Tensor z(x.shape());
  if (op == EwOp::kAdd) {
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] + y[i];
  } else {
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] * y[i];
  }
  return z;
}

Tensor add(const Tensor& x, const Tensor& y) { return elementwise(x, y, EwOp::kAdd); }
Tensor mul(const Tensor& x, const Tensor& y) { return elementwise(x, y, EwOp::kMul); }

Tensor transpose(const Tensor& x) {
  if (x.rank() != 2) throw ShapeError("transpose requires rank 2, got " + shape_str(x.shape()));
  const int r = x.dim(0), c = x.dim(1);
  Tensor y({c, r});
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) y(j, i) = x(i, j);
  }
  return y;
}

Tensor concat_rows(const std::vector<Tensor>& xs) {
  if (xs.empty()) throw ShapeError("concat_rows of nothing");
  int cols = xs[0].dim(1), rows = 0;
  for (const Tensor& x : xs) {
    if (x.rank() != 2 || x.dim(1) != cols) {
      throw ShapeError("concat_rows column mismatch: " + shape_str(x.shape()));
    }
    rows += x.dim(0);
  }
  Tensor y({rows, cols});
  std::size_t off = 0;
  for (const Tensor& x : xs) {
    for (std::size_t i = 0; i < x.size(); ++i) y[off + i] = x[i];
    off += x.size();
  }
  return y;
}

Tensor concat_cols(const std::vector<Tensor>& xs) {
  if (xs.empty()) throw ShapeError("concat_cols of nothing");
  int rows = xs[0].dim(0), cols = 0;
  for (const Tensor& x : xs) {
    if (x.rank() != 2 || x.dim(0) != rows) {
      throw ShapeError("concat_cols row mismatch: " + shape_str(x.shape()));
    }
    cols += x.dim(1);
  }
  Tensor y({rows, cols});
  int at = 0;
  for (const Tensor& x : xs) {
    const int xc = x.dim(1);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < xc; ++j) y(i, at + j) = x(i, j);
    }
    at += xc;
  }
  return y;
}

}  // namespace fcnv
