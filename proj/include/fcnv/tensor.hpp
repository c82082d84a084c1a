#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "fcnv/errors.hpp"

namespace fcnv {

// Running byte counts of live tensor buffers. The benchmark harness reads
// the high-water mark to report transient memory for one inference.
namespace memtrack {

std::size_t current_bytes();
std::size_t peak_bytes();
// Resets the peak to the current live count.
void reset_peak();

namespace detail {
void add(std::size_t n);
void sub(std::size_t n);
}  // namespace detail

}  // namespace memtrack

// Minimal allocator that reports allocations to memtrack.
template <typename T>
struct TrackingAllocator {
  using value_type = T;

  TrackingAllocator() = default;
  template <typename U>
  TrackingAllocator(const TrackingAllocator<U>&) {}

  T* allocate(std::size_t n) {
    memtrack::detail::add(n * sizeof(T));
    return static_cast<T*>(::operator new(n * sizeof(T)));
  }
  void deallocate(T* p, std::size_t n) {
    memtrack::detail::sub(n * sizeof(T));
    ::operator delete(p);
  }
  template <typename U>
  bool operator==(const TrackingAllocator<U>&) const {
    return true;
  }
};

using Shape = std::vector<int>;
using Vec = std::vector<double, TrackingAllocator<double>>;

std::string shape_str(const Shape& s);

// Dense row-major tensor of doubles with an explicit shape.
//
// Feature maps use (channel, time) ordering: a c-by-t map stores channel c0
// as the first t entries, channel c1 next, and so on. Tensors are immutable
// by convention after construction inside the library; all ops return new
// tensors, so sharing a tensor across threads for reads is safe.
class Tensor {
 public:
  Tensor() = default;

  // Zero-filled tensor. Throws ConfigError on non-positive dims.
  explicit Tensor(Shape shape);

  // Takes ownership of data; length must equal the product of dims and all
  // values must be finite.
  Tensor(Shape shape, std::vector<double> data);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor filled(Shape shape, double v);
  static Tensor scalar(double v);
  // Row-major rank-2 literal, convenient in tests: {{1,2},{3,4}}.
  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  // Rank-2 element access; unchecked for speed.
  double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * shape_[1] + c]; }
  double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * shape_[1] + c]; }

  // Same data, new shape; sizes must agree.
  Tensor reshaped(Shape shape) const;

  double item() const;  // requires size()==1

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool all_finite() const;

 private:
  Shape shape_;
  Vec data_;
};

// Deterministic 64-bit generator (SplitMix64). Identical seeds produce
// identical streams on every platform; split() derives an independently
// seeded stream. Single-owner: concurrent users must hold separate
// instances.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Integer in [0, n).
  std::uint64_t next_below(std::uint64_t n);

  Rng split() { return Rng(next_u64() ^ 0x5851F42D4C957F2DULL); }

 private:
  std::uint64_t state_;
};

enum class EwOp { kAdd, kMul };

// Standard matrix product of rank-2 tensors; throws ShapeError naming both
// shapes when inner dims differ.
Tensor matmul(const Tensor& a, const Tensor& b);

// Inverted dropout. With training=true each element is zeroed with
// probability p and survivors are scaled by 1/(1-p); the returned mask is
// multiplicative (output == input * mask), all-ones at inference.
struct DropoutResult {
  Tensor output;
  Tensor mask;
};
DropoutResult dropout(const Tensor& x, double p, Rng& rng, bool training);

// Elementwise combination of equally shaped tensors.
Tensor elementwise(const Tensor& x, const Tensor& y, EwOp op);
Tensor add(const Tensor& x, const Tensor& y);
Tensor mul(const Tensor& x, const Tensor& y);

Tensor transpose(const Tensor& x);  // rank-2

// Concatenation along axis 0 / axis 1 for rank-2 tensors.
Tensor concat_rows(const std::vector<Tensor>& xs);
Tensor concat_cols(const std::vector<Tensor>& xs);

}  // namespace fcnv
