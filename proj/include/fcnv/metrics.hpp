#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fcnv/tensor.hpp"

namespace fcnv {

// Values are percentages for ppl-adjacent rates (KS/WPR in [0,100]) and
// fractions in [0,1] for F1/accuracy; renderers multiply the latter by 100.
struct MetricResult {
  std::string name;
  double value = 0.0;
  std::uint64_t support = 0;  // tokens / characters / instances evaluated
};

// Anything that scores next tokens: the NWP model, or metric-test stubs.
class NextTokenModel {
 public:
  virtual ~NextTokenModel() = default;

  virtual int vocab() const = 0;
  // [n+1, V]: row i holds logits for the token following the first i tokens.
  virtual Tensor next_logits_all(const std::vector<int>& tokens) const = 0;
};

// Lowest index wins ties.
int argmax_row(const Tensor& logits, int row);

// exp(mean next-token cross-entropy) over every position of every line.
MetricResult perplexity(const NextTokenModel& model,
                        const std::vector<std::vector<int>>& corpus);

// Percentage of positions whose top-1 prediction (no typed prefix) is the
// target.
MetricResult word_prediction_rate(const NextTokenModel& model,
                                  const std::vector<std::vector<int>>& corpus);

// Typing simulation. Protocol (pinned): the model's top-1 vocabulary word
// extending the typed prefix is offered before every keystroke, including
// the first; accepting a correct suggestion costs one keystroke and ends
// the word; word separators are one keystroke each, between words only,
// and are never saved. KS% = 100 * saved / total characters.
// OOV context words map to unk_id; OOV targets are never suggested.
MetricResult keystroke_savings(const NextTokenModel& model,
                               const std::vector<std::vector<std::string>>& lines,
                               const std::vector<std::string>& vocab, int unk_id);

// Micro-averaged F1 from pooled TP/FP/FN counts. For single-label
// multiclass predictions this equals accuracy; the tests assert it.
MetricResult micro_f1(const std::vector<int>& predictions, const std::vector<int>& golds,
                      int classes, const std::string& name = "micro_f1");

MetricResult accuracy(const std::vector<int>& predictions, const std::vector<int>& golds,
                      const std::string& name = "accuracy");

}  // namespace fcnv
