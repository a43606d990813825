#include "narrative/eval.hpp"

#include <doctest.h>

#include "narrative/rng.hpp"

using namespace narrative;

namespace {

EncodedClause labeled(int label, int agreement) {
  EncodedClause clause;
  clause.clause_id = "c" + std::to_string(label) + std::to_string(agreement);
  clause.word_ids = {0};
  clause.pos_ids = {-1};
  clause.label = label;
  clause.agreement = agreement;
  return clause;
}

}  // namespace

TEST_CASE("agreement filter semantics") {
  CHECK(passes_agreement(1, 0));
  CHECK(passes_agreement(1, 1));
  CHECK_FALSE(passes_agreement(1, 2));
  CHECK(passes_agreement(2, 2));
  CHECK(passes_agreement(3, 2));
  CHECK_FALSE(passes_agreement(2, 3));  // 3 means exactly 3
  CHECK(passes_agreement(3, 3));
}

TEST_CASE("confusion matrix and micro-F1 on a hand case") {
  //            predicted
  // gold=0: 0 0 1   (one miss into class 2)
  // gold=1: 0 2 0
  // gold=2: 1 0 1
  std::vector<int> gold = {0, 1, 1, 2, 2};
  std::vector<int> pred = {2, 1, 1, 0, 2};
  auto report = evaluate_predictions(pred, gold, 0);
  CHECK(report.n_examples == 5);
  CHECK(report.confusion[0][2] == 1);
  CHECK(report.confusion[1][1] == 2);
  CHECK(report.confusion[2][0] == 1);
  CHECK(report.confusion[2][2] == 1);
  CHECK(report.micro_f1 == doctest::Approx(3.0 / 5.0));
  // class 1: precision 1, recall 1; class 0: precision 0, recall 0
  CHECK(report.precision[1] == doctest::Approx(1.0));
  CHECK(report.recall[1] == doctest::Approx(1.0));
  CHECK(report.precision[0] == doctest::Approx(0.0));
  // micro equals confusion trace over total
  std::size_t trace = 0, total = 0;
  for (std::size_t g = 0; g < 3; ++g) {
    for (std::size_t p = 0; p < 3; ++p) total += report.confusion[g][p];
    trace += report.confusion[g][g];
  }
  CHECK(report.micro_f1 ==
        doctest::Approx(static_cast<double>(trace) / static_cast<double>(total)));
}

TEST_CASE("constant predictor micro-F1 equals class prevalence") {
  SplitMix64 rng(17);
  std::vector<EncodedClause> test;
  for (int i = 0; i < 500; ++i) {
    test.push_back(labeled(static_cast<int>(rng.uniform_index(3)),
                           2 + static_cast<int>(rng.uniform_index(2))));
  }
  for (int constant = 0; constant < 3; ++constant) {
    auto report = evaluate([&](const EncodedClause&) { return constant; },
                           test, 0);
    std::size_t count = 0;
    for (const auto& clause : test) {
      if (clause.label == constant) ++count;
    }
    CHECK(report.micro_f1 ==
          doctest::Approx(static_cast<double>(count) /
                          static_cast<double>(test.size())));
  }
}

TEST_CASE("evaluate applies the agreement filter") {
  std::vector<EncodedClause> test = {labeled(0, 3), labeled(0, 3),
                                     labeled(1, 2), labeled(2, 1)};
  auto exact3 = evaluate([](const EncodedClause&) { return 0; }, test, 3);
  CHECK(exact3.n_examples == 2);
  CHECK(exact3.micro_f1 == doctest::Approx(1.0));

  auto ge2 = evaluate([](const EncodedClause&) { return 0; }, test, 2);
  CHECK(ge2.n_examples == 3);
  CHECK(ge2.micro_f1 == doctest::Approx(2.0 / 3.0));

  CHECK_THROWS_AS(
      evaluate([](const EncodedClause&) { return 0; },
               std::vector<EncodedClause>{labeled(0, 1)}, 3),
      DataError);
}
