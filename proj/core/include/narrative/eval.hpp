#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include "narrative/features.hpp"
#include "narrative/types.hpp"

namespace narrative {

struct EvalReport {
  double micro_f1 = 0.0;  // equals accuracy for single-label multiclass
  double macro_f1 = 0.0;
  std::array<double, 3> precision{};
  std::array<double, 3> recall{};
  std::array<double, 3> f1{};
  std::array<std::array<std::size_t, 3>, 3> confusion{};  // [gold][predicted]
  std::size_t n_examples = 0;
  int agreement_filter = 0;
};

/// Agreement filter used throughout evaluation: filter <= 1 keeps everything,
/// filter == 3 keeps exactly-3 clauses (the highest-agreement setting), any
/// other value keeps agreement >= filter.
bool passes_agreement(int agreement, int filter);

EvalReport evaluate_predictions(const std::vector<int>& predicted,
                                const std::vector<int>& gold,
                                int agreement_filter_used);

using PredictFn = std::function<int(const EncodedClause&)>;

/// Filters the test clauses by agreement, predicts, scores.
EvalReport evaluate(const PredictFn& predict,
                    const std::vector<EncodedClause>& test,
                    int agreement_filter);

}  // namespace narrative
