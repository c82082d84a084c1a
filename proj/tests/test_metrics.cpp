#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fcnv/metrics.hpp"

using namespace fcnv;

namespace {

// Zero logits everywhere: the uniform model.
struct UniformModel : NextTokenModel {
  int v;
  explicit UniformModel(int v) : v(v) {}
  int vocab() const override { return v; }
  Tensor next_logits_all(const std::vector<int>& tokens) const override {
    return Tensor({static_cast<int>(tokens.size()) + 1, v});
  }
};

// Row i puts a huge logit on tokens[i]: knows every next token.
struct OracleModel : NextTokenModel {
  int v;
  explicit OracleModel(int v) : v(v) {}
  int vocab() const override { return v; }
  Tensor next_logits_all(const std::vector<int>& tokens) const override {
    Tensor out({static_cast<int>(tokens.size()) + 1, v});
    for (std::size_t i = 0; i < tokens.size(); ++i)
      out(static_cast<int>(i), tokens[i]) = 50.0;
    return out;
  }
};

// Fixed per-word-position preferences; rows past the table repeat the last.
struct RowPrefModel : NextTokenModel {
  std::vector<std::vector<double>> rows;
  int vocab() const override { return static_cast<int>(rows.front().size()); }
  Tensor next_logits_all(const std::vector<int>& tokens) const override {
    const int v = vocab();
    Tensor out({static_cast<int>(tokens.size()) + 1, v});
    for (int i = 0; i <= static_cast<int>(tokens.size()); ++i) {
      const auto& r = rows[std::min<std::size_t>(static_cast<std::size_t>(i), rows.size() - 1)];
      for (int j = 0; j < v; ++j) out(i, j) = r[static_cast<std::size_t>(j)];
    }
    return out;
  }
};

// First-order bigram over {0, 1}: P(same) = 0.8, uniform start.
struct BigramModel : NextTokenModel {
  int vocab() const override { return 2; }
  Tensor next_logits_all(const std::vector<int>& tokens) const override {
    Tensor out({static_cast<int>(tokens.size()) + 1, 2});
    out(0, 0) = std::log(0.5);
    out(0, 1) = std::log(0.5);
    for (std::size_t i = 1; i <= tokens.size(); ++i) {
      const int prev = tokens[i - 1];
      out(static_cast<int>(i), prev) = std::log(0.8);
      out(static_cast<int>(i), 1 - prev) = std::log(0.2);
    }
    return out;
  }
};

}  // namespace

TEST_CASE("argmax_row prefers the lowest index on ties") {
  Tensor t = Tensor::from_rows({{1, 3, 3}, {0, 0, 0}});
  CHECK(argmax_row(t, 0) == 1);
  CHECK(argmax_row(t, 1) == 0);
}

TEST_CASE("perplexity of the uniform model is the vocabulary size") {
  UniformModel m(4);
  MetricResult r = perplexity(m, {{0, 1, 2}, {3, 3}});
  CHECK(r.value == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(r.support == 5);
  CHECK(r.name == "ppl");
}

TEST_CASE("perplexity of an oracle approaches one") {
  OracleModel m(7);
  MetricResult r = perplexity(m, {{2, 5, 0, 1}});
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("perplexity matches the bigram closed form") {
  BigramModel m;
  MetricResult r = perplexity(m, {{0, 0, 0, 0, 1}});
  // (ln 2 + 3(-ln .8) + (-ln .2)) / 5
  CHECK(r.value == doctest::Approx(1.8119491591942387).epsilon(1e-6));
  CHECK(r.support == 5);
}

TEST_CASE("perplexity rejects empty corpora and bad ids") {
  UniformModel m(4);
  CHECK_THROWS_AS(perplexity(m, {}), DataError);
  CHECK_THROWS_AS(perplexity(m, {{}, {}}), DataError);
  CHECK_THROWS_AS(perplexity(m, {{4}}), DataError);
}

TEST_CASE("word prediction rate counts zero-prefix top-1 hits") {
  OracleModel oracle(5);
  CHECK(word_prediction_rate(oracle, {{4, 2, 0}}).value == doctest::Approx(100.0));

  // Always predicts id 0.
  RowPrefModel m;
  m.rows = {{1.0, 0.0}};
  MetricResult r = word_prediction_rate(m, {{0, 1, 0}});
  CHECK(r.value == doctest::Approx(100.0 * 2 / 3).epsilon(1e-12));
  CHECK(r.support == 3);

  // All-tied logits resolve to the lowest id.
  UniformModel u(3);
  CHECK(word_prediction_rate(u, {{0, 0}}).value == doctest::Approx(100.0));
  CHECK(word_prediction_rate(u, {{1, 2}}).value == doctest::Approx(0.0));
}

TEST_CASE("keystroke savings: accepted first suggestion saves all but one press") {
  RowPrefModel m;
  m.rows = {{-1.0, 1.0, 0.5}};  // prefers "hello"
  std::vector<std::string> vocab{"<unk>", "hello", "help"};
  MetricResult r = keystroke_savings(m, {{"hello"}}, vocab, 0);
  CHECK(r.value == doctest::Approx(80.0).epsilon(1e-12));
  CHECK(r.support == 5);
}

TEST_CASE("keystroke savings: never-helpful model saves nothing") {
  RowPrefModel m;
  m.rows = {{-1.0, 0.0, 1.0}};  // prefers "help" until the prefix rules it out
  std::vector<std::string> vocab{"<unk>", "hello", "help"};
  // "hell" still forces one press to accept the only completion, so pressed
  // equals the word length exactly.
  MetricResult r = keystroke_savings(m, {{"hello"}}, vocab, 0);
  CHECK(r.value == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("keystroke savings: separators are pressed between words, never saved") {
  std::vector<std::string> vocab{"<unk>", "ab", "cd"};
  {
    RowPrefModel m;  // both words suggested correctly at zero prefix
    m.rows = {{-1.0, 1.0, 0.0}, {-1.0, 0.0, 1.0}};
    MetricResult r = keystroke_savings(m, {{"ab", "cd"}}, vocab, 0);
    // total 5 = 2 + separator + 2; pressed 3 = accept, space, accept
    CHECK(r.value == doctest::Approx(40.0).epsilon(1e-12));
    CHECK(r.support == 5);
  }
  {
    RowPrefModel m;  // stuck on "ab" for both positions
    m.rows = {{-1.0, 1.0, 0.0}};
    MetricResult r = keystroke_savings(m, {{"ab", "cd"}}, vocab, 0);
    // word 2 costs 'c' + accept; pressed 4 of 5
    CHECK(r.value == doctest::Approx(20.0).epsilon(1e-12));
  }
}

TEST_CASE("keystroke savings: oov targets are typed out in full") {
  RowPrefModel m;
  m.rows = {{5.0, 1.0}};  // loves suggesting "<unk>", which never matches
  std::vector<std::string> vocab{"<unk>", "ab"};
  MetricResult r = keystroke_savings(m, {{"zz"}}, vocab, 0);
  CHECK(r.value == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.support == 2);
}

TEST_CASE("keystroke savings validates its inputs") {
  RowPrefModel m;
  m.rows = {{0.0, 0.0}};
  std::vector<std::string> vocab{"<unk>", "ab"};
  CHECK_THROWS_AS(keystroke_savings(m, {{"ab"}}, vocab, 2), DataError);
  CHECK_THROWS_AS(keystroke_savings(m, {{"ab"}}, {"<unk>"}, 0), DataError);
  CHECK_THROWS_AS(keystroke_savings(m, {}, vocab, 0), DataError);
}

TEST_CASE("micro f1 equals accuracy for single-label multiclass") {
  std::vector<int> golds{0, 1, 2, 1, 0, 2};
  CHECK(micro_f1(golds, golds, 3).value == doctest::Approx(1.0));
  std::vector<int> allwrong{1, 2, 0, 2, 1, 0};
  CHECK(micro_f1(allwrong, golds, 3).value == doctest::Approx(0.0));

  std::vector<int> half{0, 1, 2, 2, 1, 1};  // 3 of 6 right
  MetricResult f1 = micro_f1(half, golds, 3);
  MetricResult acc = accuracy(half, golds);
  CHECK(f1.value == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(f1.value == doctest::Approx(acc.value).epsilon(1e-12));
  CHECK(f1.support == 6);

  CHECK(f1.value >= 0.0);
  CHECK(f1.value <= 1.0);  // fraction; renderers scale by 100
}

TEST_CASE("metric input validation") {
  CHECK_THROWS_AS(micro_f1({}, {}, 3), DataError);
  CHECK_THROWS_AS(micro_f1({0}, {0, 1}, 3), DataError);
  CHECK_THROWS_AS(micro_f1({3}, {0}, 3), DataError);
  CHECK_THROWS_AS(accuracy({}, {}), DataError);
  CHECK_THROWS_AS(accuracy({1}, {}), DataError);
}
