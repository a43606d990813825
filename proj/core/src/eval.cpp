#include "narrative/eval.hpp"

#include <stdexcept>

namespace narrative {

bool passes_agreement(int agreement, int filter) {
  if (filter <= 1) return true;
  if (filter == 3) return agreement == 3;
  return agreement >= filter;
}

EvalReport evaluate_predictions(const std::vector<int>& predicted,
                                const std::vector<int>& gold,
                                int agreement_filter_used) {
  if (predicted.size() != gold.size()) {
    throw std::invalid_argument("prediction/gold length mismatch");
  }
  if (predicted.empty()) {
    throw DataError("nothing to evaluate (empty filtered set)");
  }
  EvalReport report;
  report.agreement_filter = agreement_filter_used;
  report.n_examples = predicted.size();
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const int g = gold[i];
    const int p = predicted[i];
    if (g < 0 || g > 2 || p < 0 || p > 2) {
      throw std::invalid_argument("class index out of range in evaluation");
    }
    report.confusion[static_cast<std::size_t>(g)][static_cast<std::size_t>(p)]++;
  }

  std::size_t correct = 0;
  for (std::size_t c = 0; c < 3; ++c) correct += report.confusion[c][c];
  report.micro_f1 =
      static_cast<double>(correct) / static_cast<double>(report.n_examples);

  double macro_sum = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    std::size_t tp = report.confusion[c][c];
    std::size_t fp = 0, fn = 0;
    for (std::size_t o = 0; o < 3; ++o) {
      if (o == c) continue;
      fp += report.confusion[o][c];
      fn += report.confusion[c][o];
    }
    report.precision[c] =
        tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    report.recall[c] =
        tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    report.f1[c] = report.precision[c] + report.recall[c] == 0.0
                       ? 0.0
                       : 2.0 * report.precision[c] * report.recall[c] /
                             (report.precision[c] + report.recall[c]);
    macro_sum += report.f1[c];
  }
  report.macro_f1 = macro_sum / 3.0;
  return report;
}

EvalReport evaluate(const PredictFn& predict,
                    const std::vector<EncodedClause>& test,
                    int agreement_filter) {
  std::vector<int> predicted;
  std::vector<int> gold;
  for (const EncodedClause& clause : test) {
    if (!passes_agreement(clause.agreement, agreement_filter)) continue;
    if (clause.label < 0) {
      throw DataError("clause " + clause.clause_id +
                      " has no gold class label");
    }
    gold.push_back(clause.label);
    predicted.push_back(predict(clause));
  }
  return evaluate_predictions(predicted, gold, agreement_filter);
}

}  // namespace narrative
