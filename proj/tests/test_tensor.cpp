#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "fcnv/tensor.hpp"

using namespace fcnv;

namespace {

Tensor random_tensor(Shape shape, Rng& rng) {
  Tensor t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-1.0, 1.0);
  return t;
}

// Triple-loop reference, no cleverness.
Tensor naive_matmul(const Tensor& a, const Tensor& b) {
  Tensor out({a.dim(0), b.dim(1)});
  for (int i = 0; i < a.dim(0); ++i)
    for (int j = 0; j < b.dim(1); ++j) {
      double s = 0.0;
      for (int k = 0; k < a.dim(1); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  return out;
}

}  // namespace

TEST_CASE("tensor construction and accessors") {
  Tensor t({2, 3});
  CHECK(t.rank() == 2);
  CHECK(t.dim(0) == 2);
  CHECK(t.dim(1) == 3);
  CHECK(t.size() == 6);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(t[i] == 0.0);

  Tensor f = Tensor::filled({2, 2}, 1.5);
  CHECK(f(1, 1) == 1.5);

  Tensor s = Tensor::scalar(-3.0);
  CHECK(s.item() == -3.0);

  Tensor r = Tensor::from_rows({{1, 2, 3}, {4, 5, 6}});
  CHECK(r.dim(0) == 2);
  CHECK(r.dim(1) == 3);
  CHECK(r(1, 2) == 6.0);

  CHECK_THROWS_AS(Tensor({0, 3}), ConfigError);
  CHECK_THROWS_AS(Tensor({2, -1}), ConfigError);
  CHECK_THROWS_AS(Tensor({2}, {1.0, 2.0, 3.0}), ShapeError);
  CHECK_THROWS_AS(Tensor({1}, {std::nan("")}), Error);
}

TEST_CASE("reshape preserves data, rejects size changes") {
  Tensor t = Tensor::from_rows({{1, 2}, {3, 4}, {5, 6}});
  Tensor r = t.reshaped({2, 3});
  CHECK(r(0, 2) == 3.0);
  CHECK(r(1, 0) == 4.0);
  CHECK_THROWS_AS(t.reshaped({4, 2}), ShapeError);
}

TEST_CASE("matmul identity") {
  Rng rng(11);
  Tensor a = random_tensor({4, 4}, rng);
  Tensor eye({4, 4});
  for (int i = 0; i < 4; ++i) eye(i, i) = 1.0;
  Tensor out = matmul(a, eye);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(out[i] == a[i]);  // 1.0 rows keep it exact
}

TEST_CASE("matmul outer product") {
  Tensor col({3, 1}, {1, 2, 3});
  Tensor row({1, 2}, {10, 20});
  Tensor out = matmul(col, row);
  CHECK(out.dim(0) == 3);
  CHECK(out.dim(1) == 2);
  CHECK(out(2, 1) == 60.0);
  CHECK(out(0, 0) == 10.0);
}

TEST_CASE("matmul matches triple-loop oracle") {
  Rng rng(7);
  Tensor a = random_tensor({5, 4}, rng);
  Tensor b = random_tensor({4, 3}, rng);
  Tensor got = matmul(a, b);
  Tensor want = naive_matmul(a, b);
  REQUIRE(got.same_shape(want));
  for (std::size_t i = 0; i < got.size(); ++i)
    CHECK(std::abs(got[i] - want[i]) < 1e-12);
}

TEST_CASE("matmul shape mismatch names both shapes") {
  Tensor a({2, 3});
  Tensor b({4, 2});
  CHECK_THROWS_AS(matmul(a, b), ShapeError);
  try {
    matmul(a, b);
  } catch (const ShapeError& e) {
    std::string msg = e.what();
    CHECK(msg.find("[2x3]") != std::string::npos);
    CHECK(msg.find("[4x2]") != std::string::npos);
  }
}

TEST_CASE("elementwise add and mul") {
  Tensor a = Tensor::from_rows({{1, 2}, {3, 4}});
  Tensor b = Tensor::from_rows({{10, 20}, {30, 40}});
  CHECK(add(a, b)(1, 1) == 44.0);
  CHECK(mul(a, b)(0, 1) == 40.0);
  Tensor c({3, 2});
  CHECK_THROWS_AS(add(a, c), ShapeError);
}

TEST_CASE("transpose") {
  Tensor a = Tensor::from_rows({{1, 2, 3}, {4, 5, 6}});
  Tensor t = transpose(a);
  CHECK(t.dim(0) == 3);
  CHECK(t.dim(1) == 2);
  CHECK(t(2, 0) == 3.0);
  CHECK(t(0, 1) == 4.0);
}

TEST_CASE("concat rows and cols") {
  Tensor a = Tensor::from_rows({{1, 2}});
  Tensor b = Tensor::from_rows({{3, 4}, {5, 6}});
  Tensor v = concat_rows({a, b});
  CHECK(v.dim(0) == 3);
  CHECK(v(2, 1) == 6.0);

  Tensor c = Tensor::from_rows({{7}, {8}});
  Tensor h = concat_cols({b, c});
  CHECK(h.dim(1) == 3);
  CHECK(h(0, 2) == 7.0);
  CHECK(h(1, 0) == 5.0);

  CHECK_THROWS_AS(concat_rows({a, c}), ShapeError);  // 2 cols vs 1
  CHECK_THROWS_AS(concat_cols({a, b}), ShapeError);  // 1 row vs 2
}

TEST_CASE("dropout: inference is identity with all-ones mask") {
  Rng rng(5);
  Tensor x = random_tensor({3, 4}, rng);
  DropoutResult r = dropout(x, 0.5, rng, /*training=*/false);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(r.output[i] == x[i]);
    CHECK(r.mask[i] == 1.0);
  }
}

TEST_CASE("dropout: training zeroes or rescales, mask is multiplicative") {
  Rng rng(42);
  Tensor x = Tensor::filled({10, 50}, 2.0);
  const double p = 0.6;
  DropoutResult r = dropout(x, p, rng, /*training=*/true);
  int zeros = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double scaled = 2.0 / (1.0 - p);
    CHECK((r.output[i] == 0.0 || r.output[i] == doctest::Approx(scaled)));
    CHECK(r.output[i] == doctest::Approx(x[i] * r.mask[i]));
    if (r.output[i] == 0.0) ++zeros;
  }
  // 500 elements at p=0.6: a drop count wildly off means the mask is wrong.
  CHECK(zeros > 200);
  CHECK(zeros < 400);
}

TEST_CASE("dropout: p=0 training is identity") {
  Rng rng(1);
  Tensor x = random_tensor({2, 3}, rng);
  DropoutResult r = dropout(x, 0.0, rng, true);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(r.output[i] == x[i]);
}

TEST_CASE("dropout rejects bad probabilities") {
  Rng rng(1);
  Tensor x({1, 1});
  CHECK_THROWS_AS(dropout(x, 1.0, rng, true), ConfigError);
  CHECK_THROWS_AS(dropout(x, -0.1, rng, true), ConfigError);
}

TEST_CASE("rng determinism and split independence") {
  Rng a(123);
  Rng b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng root(9);
  Rng child1 = root.split();
  Rng child2 = root.split();
  // Distinct child streams, and both distinct from the parent's continuation.
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 20; ++i) {
    seen.insert(child1.next_u64());
    seen.insert(child2.next_u64());
    seen.insert(root.next_u64());
  }
  CHECK(seen.size() == 60);
}

TEST_CASE("rng next_below stays in range and covers values") {
  Rng rng(77);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    std::uint64_t v = rng.next_below(7);
    CHECK(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
  CHECK(rng.next_below(1) == 0);
}

TEST_CASE("rng next_double in [0,1)") {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    double d = rng.next_double();
    CHECK(d >= 0.0);
    CHECK(d < 1.0);
  }
}

TEST_CASE("memtrack reports live bytes and high-water mark") {
  std::size_t before = memtrack::current_bytes();
  memtrack::reset_peak();
  {
    Tensor big({100, 100});  // 80 kB
    CHECK(memtrack::current_bytes() >= before + 80000);
    CHECK(memtrack::peak_bytes() >= before + 80000);
  }
  CHECK(memtrack::current_bytes() == before);
  // Peak survives the free until the next reset.
  CHECK(memtrack::peak_bytes() >= before + 80000);
  memtrack::reset_peak();
  CHECK(memtrack::peak_bytes() == memtrack::current_bytes());
}

TEST_CASE("shape_str uses the compact dims-with-x form") {
  CHECK(shape_str({2, 3}) == "[2x3]");
  CHECK(shape_str({7}) == "[7]");
  CHECK(shape_str({}) == "[]");
}
