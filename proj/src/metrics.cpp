#include "fcnv/metrics.hpp"

#include <cmath>
#include <string>
#include <unordered_map>

#include "fcnv/errors.hpp"

namespace fcnv {

namespace {

void check_ids(const std::vector<int>& line, int vocab) {
  for (int id : line)
    if (id < 0 || id >= vocab)
      throw DataError("token id " + std::to_string(id) + " outside vocab of " +
                      std::to_string(vocab));
}

// Stable cross-entropy of one logits row against a target id.
double row_cross_entropy(const Tensor& logits, int row, int target) {
  const int v = logits.dim(1);
  double m = logits(row, 0);
  for (int j = 1; j < v; ++j) m = std::max(m, logits(row, j));
  double sum = 0.0;
  for (int j = 0; j < v; ++j) sum += std::exp(logits(row, j) - m);
  return std::log(sum) + m - logits(row, target);
}

}  // namespace

int argmax_row(const Tensor& logits, int row) {
  const int v = logits.dim(1);
  if (v <= 0) throw InternalError("argmax over empty row");
  int best = 0;
  for (int j = 1; j < v; ++j)
    if (logits(row, j) > logits(row, best)) best = j;
  return best;
}

MetricResult perplexity(const NextTokenModel& model,
                        const std::vector<std::vector<int>>& corpus) {
  double total_ce = 0.0;
  std::uint64_t n = 0;
  for (const auto& line : corpus) {
    if (line.empty()) continue;
    check_ids(line, model.vocab());
    const Tensor logits = model.next_logits_all(line);
    for (std::size_t i = 0; i < line.size(); ++i) {
      total_ce += row_cross_entropy(logits, static_cast<int>(i), line[i]);
      ++n;
    }
  }
  if (n == 0) throw DataError("perplexity: no tokens to score");
  return {"ppl", std::exp(total_ce / static_cast<double>(n)), n};
}

MetricResult word_prediction_rate(const NextTokenModel& model,
                                  const std::vector<std::vector<int>>& corpus) {
  std::uint64_t n = 0, hits = 0;
  for (const auto& line : corpus) {
    if (line.empty()) continue;
    check_ids(line, model.vocab());
    const Tensor logits = model.next_logits_all(line);
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (argmax_row(logits, static_cast<int>(i)) == line[i]) ++hits;
      ++n;
    }
  }
  if (n == 0) throw DataError("word_prediction_rate: no tokens to score");
  return {"wpr", 100.0 * static_cast<double>(hits) / static_cast<double>(n), n};
}

MetricResult keystroke_savings(const NextTokenModel& model,
                               const std::vector<std::vector<std::string>>& lines,
                               const std::vector<std::string>& vocab, int unk_id) {
  if (unk_id < 0 || unk_id >= static_cast<int>(vocab.size()))
    throw DataError("keystroke_savings: unk id outside vocab");
  if (static_cast<int>(vocab.size()) != model.vocab())
    throw DataError("keystroke_savings: vocab size does not match model");

  std::unordered_map<std::string, int> to_id;
  for (std::size_t i = 0; i < vocab.size(); ++i)
    to_id.emplace(vocab[i], static_cast<int>(i));

  std::uint64_t total = 0, pressed = 0;
  for (const auto& words : lines) {
    if (words.empty()) continue;
    std::vector<int> ids;
    ids.reserve(words.size());
    for (const auto& w : words) {
      auto it = to_id.find(w);
      ids.push_back(it == to_id.end() ? unk_id : it->second);
    }
    const Tensor logits = model.next_logits_all(ids);
    for (std::size_t j = 0; j < words.size(); ++j) {
      const std::string& target = words[j];
      total += target.size();
      std::string typed;
      while (typed != target) {
        // Best vocabulary completion of the typed prefix; -1 when none.
        int best = -1;
        for (std::size_t v = 0; v < vocab.size(); ++v) {
          if (vocab[v].size() < typed.size() ||
              vocab[v].compare(0, typed.size(), typed) != 0)
            continue;
          if (best < 0 || logits(static_cast<int>(j), static_cast<int>(v)) >
                              logits(static_cast<int>(j), best))
            best = static_cast<int>(v);
        }
        ++pressed;
        if (best >= 0 && vocab[best] == target) break;  // accepted
        typed.push_back(target[typed.size()]);
      }
      if (j + 1 < words.size()) {  // separator: always typed, never saved
        ++pressed;
        ++total;
      }
    }
  }
  if (total == 0) throw DataError("keystroke_savings: empty corpus");
  return {"ks",
          100.0 * static_cast<double>(total - pressed) / static_cast<double>(total),
          total};
}

MetricResult micro_f1(const std::vector<int>& predictions, const std::vector<int>& golds,
                      int classes, const std::string& name) {
  if (predictions.size() != golds.size())
    throw DataError(name + ": prediction/gold count mismatch");
  if (predictions.empty()) throw DataError(name + ": nothing to score");
  std::uint64_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const int p = predictions[i], g = golds[i];
    if (p < 0 || p >= classes || g < 0 || g >= classes)
      throw DataError(name + ": label outside " + std::to_string(classes) + " classes");
    if (p == g) {
      ++tp;
    } else {
      ++fp;  // wrong prediction for class p
      ++fn;  // missed gold class g
    }
  }
  const double precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  const double recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  const double f1 =
      precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  return {name, f1, predictions.size()};
}

MetricResult accuracy(const std::vector<int>& predictions, const std::vector<int>& golds,
                      const std::string& name) {
  if (predictions.size() != golds.size())
    throw DataError(name + ": prediction/gold count mismatch");
  if (predictions.empty()) throw DataError(name + ": nothing to score");
  std::uint64_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    if (predictions[i] == golds[i]) ++hits;
  return {name, static_cast<double>(hits) / static_cast<double>(predictions.size()),
          predictions.size()};
}

}  // namespace fcnv
