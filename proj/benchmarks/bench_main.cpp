#include <benchmark/benchmark.h>

#include <sstream>

#include "narrative/cnn.hpp"
#include "narrative/corpus.hpp"
#include "narrative/features.hpp"
#include "narrative/matcher.hpp"
#include "narrative/rng.hpp"
#include "narrative/treebank.hpp"

using namespace narrative;

namespace {

const char* kSentence =
    "(S (S (NP (PRP I)) (VP (VBD went) (PP (TO to) (NP (NN college))))) "
    "(CC and) (S (NP (PRP I)) (VP (VBD realized) (SBAR (S (NP (PRP I)) "
    "(ADVP (RB actually)) (VP (VBD did) (RB n't) (VP (VB wanna) (VP (VB be) "
    "(NP (DT a) (NN doctor))))))))) (. .))";

void BM_ParseBracketed(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(parse_bracketed(kSentence));
  }
}
BENCHMARK(BM_ParseBracketed);

void BM_SegmentSentence(benchmark::State& state) {
  ParseNode tree = parse_bracketed(kSentence);
  for (auto _ : state) {
    benchmark::DoNotOptimize(segment_sentence(tree));
  }
}
BENCHMARK(BM_SegmentSentence);

void BM_Tokenize(benchmark::State& state) {
  const std::string text =
      "And slowly and slowly, I started doing small jobs, you know, like, "
      "you know, I think one of my first jobs was ironing a suit.";
  for (auto _ : state) {
    benchmark::DoNotOptimize(tokenize(text));
  }
}
BENCHMARK(BM_Tokenize);

void BM_CnnForward(benchmark::State& state) {
  const int tokens = static_cast<int>(state.range(0));
  CnnConfig config;  // 345-wide rows, 90 filters, paper shape
  CnnModel model(config, random_embeddings(6000, 300, 1).rows, 2);
  EncodedClause clause;
  SplitMix64 rng(3);
  for (int t = 0; t < tokens; ++t) {
    clause.word_ids.push_back(static_cast<int>(rng.uniform_index(6000)));
    clause.pos_ids.push_back(static_cast<int>(rng.uniform_index(45)));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.forward_encoded(clause));
  }
}
BENCHMARK(BM_CnnForward)->Arg(4)->Arg(11)->Arg(32);

void BM_PairScore(benchmark::State& state) {
  const std::size_t clauses = static_cast<std::size_t>(state.range(0));
  SplitMix64 rng(4);
  auto story = [&](const std::string& id) {
    Story s;
    s.story_id = id;
    for (std::size_t i = 0; i < clauses; ++i) {
      Clause c;
      c.story_id = id;
      c.index = static_cast<int>(i);
      c.clause_id = id + "#" + std::to_string(i);
      c.text = "clause " + std::to_string(rng.next());
      c.tokens.push_back(Token{"clause", std::nullopt});
      c.gold = kClassifierLabelOrder[rng.uniform_index(3)];
      c.agreement = 3;
      s.clauses.push_back(std::move(c));
    }
    return s;
  };
  Story a = story("a"), b = story("b");

  // deterministic hash-based vectors, same idea as the test stub
  class HashEncoder : public SentenceEncoder {
   public:
    Eigen::VectorXf encode(const std::string& text) const override {
      SplitMix64 r(fnv1a64(text));
      Eigen::VectorXf v(128);
      for (int i = 0; i < 128; ++i) {
        v(i) = static_cast<float>(r.uniform_real(-1.0, 1.0));
      }
      return v;
    }
    int dim() const override { return 128; }
    std::string name() const override { return "hash"; }
  } encoder;

  for (auto _ : state) {
    benchmark::DoNotOptimize(pair_score(a, b, std::nullopt, encoder));
  }
}
BENCHMARK(BM_PairScore)->Arg(8)->Arg(17);

}  // namespace

BENCHMARK_MAIN();
