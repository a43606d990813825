// Acceptance suite: runs each acceptance criterion end to end and prints one
// PASS/FAIL line per criterion. Exits nonzero if any criterion fails.
//
// Criterion 4 (headline reproduction on the released RTN corpus) is
// conditional on that dataset being obtainable. This environment has no copy
// of it, so per the criterion's own fallback it is replaced by the
// classifier-sanity checks plus the prevalence identity, verified on
// synthetic corpora; the line below reports that explicitly.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "narrative/baselines.hpp"
#include "narrative/cnn.hpp"
#include "narrative/corpus.hpp"
#include "narrative/eval.hpp"
#include "narrative/features.hpp"
#include "narrative/matcher.hpp"
#include "narrative/rng.hpp"
#include "narrative/treebank.hpp"

using namespace narrative;
using json = nlohmann::json;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool ok,
            const std::string& detail) {
  std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << id << " (" << name
            << "): " << detail << "\n";
  if (!ok) ++g_failures;
}

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void require(bool condition, const std::string& what) {
    if (!condition) {
      ok = false;
      detail << (detail.str().empty() ? "" : "; ") << "FAILED: " << what;
    }
  }
};

// --- shared generators -------------------------------------------------------

ParseNode random_tree(SplitMix64& rng, int depth) {
  static const std::vector<std::string> kConstituents = {
      "S", "NP", "VP", "PP", "SBAR", "ADVP", "SINV", "SQ", "FRAG", "INTJ"};
  static const std::vector<std::string> kTags = {"DT", "NN", "VBD", "IN",
                                                 "PRP", "RB", "CC", "JJ"};
  static const std::vector<std::string> kWords = {
      "the", "dog", "ran", "in", "park", "she", "fast", "and", "big", "sat"};
  if (depth >= 4 || rng.uniform_index(3) == 0) {
    ParseNode leaf;
    leaf.label = kTags[rng.uniform_index(kTags.size())];
    leaf.leaf_text = kWords[rng.uniform_index(kWords.size())];
    return leaf;
  }
  ParseNode node;
  node.label = kConstituents[rng.uniform_index(kConstituents.size())];
  const std::size_t n_children = 1 + rng.uniform_index(3);
  for (std::size_t i = 0; i < n_children; ++i) {
    node.children.push_back(random_tree(rng, depth + 1));
  }
  return node;
}

std::vector<EncodedClause> keyword_corpus(int n, int vocab_per_class,
                                          std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<EncodedClause> clauses;
  for (int i = 0; i < n; ++i) {
    const int label = i % 3;
    EncodedClause clause;
    clause.clause_id = "sep#" + std::to_string(i);
    const int len = 4 + static_cast<int>(rng.uniform_index(5));
    for (int t = 0; t < len; ++t) {
      clause.word_ids.push_back(
          1 + label * vocab_per_class +
          static_cast<int>(
              rng.uniform_index(static_cast<std::size_t>(vocab_per_class))));
      clause.pos_ids.push_back(-1);
    }
    clause.label = label;
    clause.agreement = 3;
    clauses.push_back(std::move(clause));
  }
  return clauses;
}

Clause make_clause(const std::string& story_id, int index,
                   const std::vector<std::string>& tokens,
                   std::optional<ClauseType> gold, int agreement = 3) {
  Clause clause;
  clause.story_id = story_id;
  clause.index = index;
  clause.clause_id = story_id + "#" + std::to_string(index);
  for (const std::string& t : tokens) {
    clause.tokens.push_back(Token{t, std::nullopt});
    if (!clause.text.empty()) clause.text += ' ';
    clause.text += t;
  }
  clause.gold = gold;
  if (gold) clause.agreement = agreement;
  return clause;
}

class StubEncoder : public SentenceEncoder {
 public:
  explicit StubEncoder(int dim = 16) : dim_(dim) {}
  Eigen::VectorXf encode(const std::string& text) const override {
    SplitMix64 rng(fnv1a64(text));
    Eigen::VectorXf v(dim_);
    for (int i = 0; i < dim_; ++i) {
      v(i) = static_cast<float>(rng.uniform_real(-1.0, 1.0));
    }
    return v;
  }
  int dim() const override { return dim_; }
  std::string name() const override { return "stub"; }

 private:
  int dim_;
};

long double cosine_ref(const Eigen::VectorXf& u, const Eigen::VectorXf& v) {
  long double dot = 0, nu = 0, nv = 0;
  for (int i = 0; i < u.size(); ++i) {
    dot += static_cast<long double>(u(i)) * static_cast<long double>(v(i));
    nu += static_cast<long double>(u(i)) * static_cast<long double>(u(i));
    nv += static_cast<long double>(v(i)) * static_cast<long double>(v(i));
  }
  if (nu == 0 || nv == 0) return 0;
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

Story random_story(const std::string& id, std::size_t n_clauses,
                   SplitMix64& rng) {
  std::vector<Clause> clauses;
  for (std::size_t i = 0; i < n_clauses; ++i) {
    std::vector<std::string> words;
    const std::size_t len = 1 + rng.uniform_index(6);
    for (std::size_t w = 0; w < len; ++w) {
      words.push_back("w" + std::to_string(rng.uniform_index(40)));
    }
    clauses.push_back(make_clause(id, static_cast<int>(i), words,
                                  kAllClauseTypes[rng.uniform_index(4)]));
  }
  Story story;
  story.story_id = id;
  story.clauses = std::move(clauses);
  return story;
}

std::optional<double> pair_score_ref(const Story& a, const Story& b,
                                     std::optional<ClauseType> aspect,
                                     const SentenceEncoder& encoder) {
  auto texts = [&](const Story& s) {
    std::vector<std::string> out;
    for (const Clause& c : s.clauses) {
      if (*c.gold == ClauseType::NotStory) continue;
      if (aspect && *c.gold != *aspect) continue;
      out.push_back(c.text);
    }
    return out;
  };
  auto ta = texts(a), tb = texts(b);
  if (ta.empty() || tb.empty()) return std::nullopt;
  auto directed = [&](const std::vector<std::string>& from,
                      const std::vector<std::string>& to) {
    long double total = 0;
    for (const auto& f : from) {
      long double best = -2;
      for (const auto& t : to) {
        best = std::max(best, cosine_ref(encoder.encode(f), encoder.encode(t)));
      }
      total += best;
    }
    return total / static_cast<long double>(from.size());
  };
  return static_cast<double>((directed(ta, tb) + directed(tb, ta)) / 2.0L);
}

// --- criterion 1: segmentation ----------------------------------------------

void criterion_segmentation() {
  Check check;
  const std::string fixture =
      std::string(NARRATIVE_TEST_DATA_DIR) + "/segmentation_oracle.jsonl";
  std::ifstream in(fixture);
  check.require(static_cast<bool>(in), "fixture file present");

  std::size_t stories = 0, sentences = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json record = json::parse(line);
    const std::string story_id = record.at("story_id");
    const int oracle = record.at("oracle_clause_count").get<int>();
    std::vector<ParseNode> trees;
    for (const auto& t : record.at("sentences")) {
      trees.push_back(parse_bracketed(t.get<std::string>()));
    }
    sentences += trees.size();
    ++stories;

    auto spans = segment_story(trees);
    const int got = static_cast<int>(spans.size());
    check.require(std::abs(got - oracle) <= 1,
                  story_id + ": clause count " + std::to_string(got) +
                      " vs oracle " + std::to_string(oracle));

    // exact hand-segmented clause token sequences, where committed
    if (record.contains("expected_clauses")) {
      for (const auto& [key, expected] : record["expected_clauses"].items()) {
        const int sentence_index = std::stoi(key);
        auto sentence_spans =
            segment_sentence(trees[static_cast<std::size_t>(sentence_index)]);
        check.require(sentence_spans.size() == expected.size(),
                      story_id + " sentence " + key + " span count");
        for (std::size_t s = 0;
             s < std::min(sentence_spans.size(), expected.size()); ++s) {
          std::vector<std::string> got_tokens;
          for (const Token& t : sentence_spans[s].tokens) {
            got_tokens.push_back(t.text);
          }
          check.require(
              got_tokens == expected[s].get<std::vector<std::string>>(),
              story_id + " sentence " + key + " clause " + std::to_string(s) +
                  " tokens");
        }
      }
    }

    for (const ParseNode& tree : trees) {
      auto leaves = tree_leaves(tree);
      std::size_t covered = 0;
      for (const ClauseSpan& span : segment_sentence(tree)) {
        covered += span.tokens.size();
      }
      check.require(covered == leaves.size(),
                    story_id + ": token conservation on committed trees");
    }
  }
  check.require(sentences >= 20, "suite has >= 20 sentences (" +
                                     std::to_string(sentences) + ")");

  // 1,000 random trees: exact token conservation, order included
  SplitMix64 rng(20250810);
  std::size_t conserved = 0;
  for (int i = 0; i < 1000; ++i) {
    ParseNode tree = random_tree(rng, 0);
    auto leaves = tree_leaves(tree);
    std::vector<Token> flat;
    for (const ClauseSpan& span : segment_sentence(tree)) {
      flat.insert(flat.end(), span.tokens.begin(), span.tokens.end());
    }
    bool same = flat.size() == leaves.size();
    for (std::size_t t = 0; same && t < leaves.size(); ++t) {
      same = flat[t].text == leaves[t].text && flat[t].pos == leaves[t].pos;
    }
    if (same) ++conserved;
  }
  check.require(conserved == 1000, "token conservation on random trees (" +
                                       std::to_string(conserved) + "/1000)");

  std::ostringstream detail;
  detail << stories << " oracle stories, " << sentences
         << " sentences within +/-1 clause; token conservation exact on "
         << "committed and 1000 random trees";
  report(1, "segmentation-oracle", check.ok,
         check.ok ? detail.str() : check.detail.str());
}

// --- criterion 2: aggregation ------------------------------------------------

void criterion_aggregation() {
  Check check;
  const std::array<ClauseType, 3> story_types = {
      ClauseType::Action, ClauseType::Orientation, ClauseType::Evaluation};

  // all 3^3 combinations vs an exhaustive counting oracle
  for (ClauseType a : story_types) {
    for (ClauseType b : story_types) {
      for (ClauseType c : story_types) {
        AnnotationSet set;
        set.labels = {{"w0", a}, {"w1", b}, {"w2", c}};
        std::map<ClauseType, int> counts;
        counts[a]++;
        counts[b]++;
        counts[c]++;
        int best = 0;
        for (const auto& [label, count] : counts) best = std::max(best, count);
        std::set<ClauseType> modal;
        for (const auto& [label, count] : counts) {
          if (count == best) modal.insert(label);
        }
        for (std::uint64_t seed : {0ull, 7ull, 991ull}) {
          GoldLabel gold = aggregate_gold_label(set, seed);
          check.require(modal.count(gold.gold) == 1,
                        "gold label is a modal label");
          check.require(gold.agreement == counts[gold.gold],
                        "agreement equals the modal count");
          if (modal.size() == 1) {
            check.require(gold.gold == *modal.begin(),
                          "strict majority is deterministic");
          }
          GoldLabel again = aggregate_gold_label(set, seed);
          check.require(
              again.gold == gold.gold && again.agreement == gold.agreement,
              "same seed reproduces the same outcome");
        }
      }
    }
  }

  // three-way tie: outcomes uniform within +/-2% over 10,000 seeds
  AnnotationSet tie;
  tie.labels = {{"w0", ClauseType::Action},
                {"w1", ClauseType::Evaluation},
                {"w2", ClauseType::Orientation}};
  std::map<ClauseType, int> tally;
  const int n_seeds = 10000;
  for (int seed = 0; seed < n_seeds; ++seed) {
    tally[aggregate_gold_label(tie, static_cast<std::uint64_t>(seed)).gold]++;
  }
  std::ostringstream shares;
  for (ClauseType t : story_types) {
    const double share = static_cast<double>(tally[t]) / n_seeds;
    shares << " " << to_string(t) << "=" << std::fixed << std::setprecision(4)
           << share;
    check.require(std::abs(share - 1.0 / 3.0) <= 0.02,
                  "tie share for " + to_string(t) + " within 2% of 1/3");
  }

  // two-annotator tie behaves the same way
  AnnotationSet pair_tie;
  pair_tie.labels = {{"w0", ClauseType::Action}, {"w1", ClauseType::NotStory}};
  std::map<ClauseType, int> pair_tally;
  for (int seed = 0; seed < n_seeds; ++seed) {
    pair_tally[aggregate_gold_label(pair_tie, static_cast<std::uint64_t>(seed))
                   .gold]++;
  }
  for (ClauseType t : {ClauseType::Action, ClauseType::NotStory}) {
    check.require(
        std::abs(static_cast<double>(pair_tally[t]) / n_seeds - 0.5) <= 0.02,
        "two-way tie share within 2% of 1/2");
  }

  report(2, "aggregation-equivalence", check.ok,
         check.ok ? "27 combinations match the counting oracle; tie shares" +
                        shares.str()
                  : check.detail.str());
}

// --- criterion 3: classifier sanity -----------------------------------------

CnnConfig paper_architecture(int embedding_dim) {
  CnnConfig config;  // widths 2/3/4, 30 filters each, 90->45->3
  config.embedding_dim = embedding_dim;
  config.pos_dim = 45;
  return config;
}

void criterion_classifier() {
  Check check;
  std::ostringstream detail;

  // (a) overfit 64 clauses to 100% train accuracy within 200 epochs
  {
    auto clauses = keyword_corpus(72, 40, 404);
    // shuffle labels so memorization, not separability, is what is tested
    SplitMix64 label_rng(5);
    for (auto& clause : clauses) {
      clause.label = static_cast<int>(label_rng.uniform_index(3));
    }
    std::vector<EncodedClause> train_set(clauses.begin(), clauses.begin() + 64);
    std::vector<EncodedClause> val_set(clauses.begin() + 64, clauses.end());

    CnnConfig config = paper_architecture(64);
    config.dropout = 0.0;
    CnnModelT<float> model(config, random_embeddings(121, 64, 3).rows, 11);
    TrainConfig tc;
    tc.learning_rate = 2e-3;
    tc.batch_size = 64;
    tc.max_epochs = 200;
    tc.patience = 200;
    tc.restore_best = false;  // the oracle is about raw training capacity
    tc.seed = 21;
    auto log = train(model, train_set, val_set, tc);

    std::size_t correct = 0;
    for (const auto& clause : train_set) {
      if (model.predict_encoded(clause) == clause.label) ++correct;
    }
    check.require(correct == train_set.size(),
                  "overfit: " + std::to_string(correct) + "/64 after " +
                      std::to_string(log.epochs_run) + " epochs");
    detail << "overfit " << correct << "/64 in " << log.epochs_run << " epochs";
  }

  // (b) planted-keyword separable corpus, 600 clauses: test micro-F1 >= 95%
  {
    auto clauses = keyword_corpus(600, 60, 909);
    SplitMix64 rng(33);
    rng.shuffle(clauses);
    std::vector<EncodedClause> train_set(clauses.begin(),
                                         clauses.begin() + 516);
    std::vector<EncodedClause> val_set(clauses.begin() + 516,
                                       clauses.begin() + 558);
    std::vector<EncodedClause> test_set(clauses.begin() + 558, clauses.end());

    CnnConfig config = paper_architecture(64);
    CnnModelT<float> model(config, random_embeddings(181, 64, 7).rows, 13);
    TrainConfig tc;
    tc.learning_rate = 1e-3;
    tc.batch_size = 64;
    tc.max_epochs = 60;
    tc.patience = 10;
    tc.seed = 23;
    train(model, train_set, val_set, tc);

    EvalReport result = evaluate(
        [&](const EncodedClause& clause) { return model.predict_encoded(clause); },
        test_set, 0);
    check.require(result.micro_f1 >= 0.95, "separable corpus micro-F1 " +
                                               std::to_string(result.micro_f1));
    detail << "; separable test micro-F1 " << std::fixed << std::setprecision(3)
           << result.micro_f1 << " (n=" << result.n_examples << ")";
  }

  // (c) gradient check on the 5-token toy model, double precision
  {
    CnnConfig config;
    config.filter_widths = {2, 3};
    config.filters_per_width = 1;  // two kernels
    config.hidden_dim = 4;
    config.dropout = 0.0;
    config.embedding_dim = 5;
    config.pos_dim = 3;
    SplitMix64 rng(17);
    CnnModelT<double>::Mat embedding(7, 5);
    for (Eigen::Index r = 0; r < 7; ++r) {
      for (Eigen::Index c = 0; c < 5; ++c) {
        embedding(r, c) = rng.uniform_real(-1.0, 1.0);
      }
    }
    CnnModelT<double> model(config, embedding, 19);

    std::vector<EncodedClause> batch;
    for (int e = 0; e < 2; ++e) {
      EncodedClause clause;
      clause.clause_id = "g" + std::to_string(e);
      for (int t = 0; t < 5; ++t) {
        clause.word_ids.push_back(static_cast<int>(rng.uniform_index(7)));
        clause.pos_ids.push_back(static_cast<int>(rng.uniform_index(3)));
      }
      clause.label = e == 0 ? 0 : 2;
      batch.push_back(std::move(clause));
    }

    std::vector<CnnModelT<double>::Mat> grads;
    model.loss_and_gradients(batch, 0.0, nullptr, grads);
    auto params = model.params();
    double worst = 0.0;
    const double h = 1e-5;
    for (std::size_t p = 0; p < params.size(); ++p) {
      auto& value = *params[p].value;
      for (Eigen::Index r = 0; r < value.rows(); ++r) {
        for (Eigen::Index c = 0; c < value.cols(); ++c) {
          const double original = value(r, c);
          std::vector<CnnModelT<double>::Mat> scratch;
          value(r, c) = original + h;
          const double plus =
              model.loss_and_gradients(batch, 0.0, nullptr, scratch);
          value(r, c) = original - h;
          const double minus =
              model.loss_and_gradients(batch, 0.0, nullptr, scratch);
          value(r, c) = original;
          const double numeric = (plus - minus) / (2.0 * h);
          const double analytic = grads[p](r, c);
          const double rel =
              std::abs(numeric - analytic) /
              std::max({1e-6, std::abs(numeric), std::abs(analytic)});
          worst = std::max(worst, rel);
        }
      }
    }
    check.require(worst < 1e-4, "gradient check worst relative error " +
                                    std::to_string(worst));
    detail << "; gradient check worst rel err " << std::scientific
           << std::setprecision(2) << worst << std::fixed;
  }

  // (d) same seed, two runs: identical validation curves
  {
    auto clauses = keyword_corpus(120, 20, 515);
    std::vector<EncodedClause> train_set(clauses.begin(), clauses.begin() + 96);
    std::vector<EncodedClause> val_set(clauses.begin() + 96, clauses.end());
    CnnConfig config = paper_architecture(32);
    TrainConfig tc;
    tc.learning_rate = 1e-3;
    tc.batch_size = 32;
    tc.max_epochs = 10;
    tc.patience = 10;
    tc.seed = 77;

    CnnModelT<float> model1(config, random_embeddings(61, 32, 9).rows, 31);
    CnnModelT<float> model2(config, random_embeddings(61, 32, 9).rows, 31);
    auto log1 = train(model1, train_set, val_set, tc);
    auto log2 = train(model2, train_set, val_set, tc);
    bool identical = log1.val_error.size() == log2.val_error.size() &&
                     log1.train_loss.size() == log2.train_loss.size();
    for (std::size_t i = 0; identical && i < log1.val_error.size(); ++i) {
      identical = log1.val_error[i] == log2.val_error[i] &&
                  log1.train_loss[i] == log2.train_loss[i];
    }
    check.require(identical, "same-seed validation curves identical");
    detail << "; same-seed curves identical over " << log1.epochs_run
           << " epochs";
  }

  report(3, "classifier-sanity", check.ok,
         check.ok ? detail.str() : check.detail.str());
}

// --- criterion 4: replaced per its own fallback ------------------------------

void criterion_headline_or_fallback() {
  Check check;

  // prevalence identity: a constant predictor's micro-F1 equals that class's
  // prevalence in the (filtered) evaluation set, exactly
  SplitMix64 rng(2024);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<EncodedClause> corpus;
    const int n = 50 + static_cast<int>(rng.uniform_index(400));
    for (int i = 0; i < n; ++i) {
      EncodedClause clause;
      clause.clause_id = "p" + std::to_string(i);
      clause.word_ids = {0};
      clause.pos_ids = {-1};
      clause.label = static_cast<int>(rng.uniform_index(3));
      clause.agreement = 2 + static_cast<int>(rng.uniform_index(2));
      corpus.push_back(std::move(clause));
    }
    for (int constant = 0; constant < 3; ++constant) {
      for (int filter : {0, 2, 3}) {
        std::size_t kept = 0, hits = 0;
        for (const auto& clause : corpus) {
          if (!passes_agreement(clause.agreement, filter)) continue;
          ++kept;
          if (clause.label == constant) ++hits;
        }
        if (kept == 0) continue;
        EvalReport result = evaluate(
            [&](const EncodedClause&) { return constant; }, corpus, filter);
        const double prevalence =
            static_cast<double>(hits) / static_cast<double>(kept);
        check.require(std::abs(result.micro_f1 - prevalence) < 1e-12,
                      "constant predictor micro-F1 equals prevalence");
      }
    }
  }

  report(4, "headline-reproduction", check.ok,
         check.ok
             ? "RTN release not obtainable in this environment; replaced per "
               "the criterion's fallback by criterion 3 plus the prevalence "
               "identity, which holds exactly on 20 synthetic corpora"
             : check.detail.str());
}

// --- criterion 5: baseline floor ---------------------------------------------

void criterion_baselines() {
  Check check;

  // separable POS-profile corpus: each class has a distinctive tag family
  PosTagset tagset = PosTagset::penn_treebank();
  const std::vector<std::vector<std::string>> families = {
      {"VBD", "VBP", "PRP"}, {"JJ", "RB", "UH"}, {"NN", "DT", "IN"}};
  SplitMix64 rng(606);
  Eigen::MatrixXf features(600, 90);
  std::vector<int> labels(600);
  for (int i = 0; i < 600; ++i) {
    const int label = i % 3;
    labels[static_cast<std::size_t>(i)] = label;
    Clause clause = make_clause("b", i, {}, std::nullopt);
    const int len = 5 + static_cast<int>(rng.uniform_index(6));
    for (int t = 0; t < len; ++t) {
      Token token;
      token.text = "tok";
      const auto& family = families[static_cast<std::size_t>(label)];
      // mostly family tags with some shared noise tags
      token.pos = rng.uniform_index(5) == 0
                      ? tagset.tags()[rng.uniform_index(tagset.size())]
                      : family[rng.uniform_index(family.size())];
      clause.tokens.push_back(std::move(token));
    }
    features.row(i) = pos_feature_vector(clause, tagset).transpose();
  }

  Eigen::MatrixXf train_x = features.topRows(480);
  std::vector<int> train_y(labels.begin(), labels.begin() + 480);
  Eigen::MatrixXf test_x = features.bottomRows(120);
  std::vector<int> test_y(labels.begin() + 480, labels.end());

  std::map<int, std::size_t> prevalence;
  for (int y : test_y) prevalence[y]++;
  std::size_t top = 0;
  for (const auto& [label, count] : prevalence) top = std::max(top, count);
  const double floor =
      static_cast<double>(top) / static_cast<double>(test_y.size());

  auto accuracy = [&](auto&& predict) {
    std::size_t hits = 0;
    for (int i = 0; i < test_x.rows(); ++i) {
      if (predict(Eigen::VectorXf(test_x.row(i).transpose())) ==
          test_y[static_cast<std::size_t>(i)]) {
        ++hits;
      }
    }
    return static_cast<double>(hits) / static_cast<double>(test_y.size());
  };

  SvmConfig svm_config;
  svm_config.seed = 11;
  LinearSvm svm = LinearSvm::train(train_x, train_y, 3, svm_config);
  const double svm_acc =
      accuracy([&](const Eigen::VectorXf& x) { return svm.predict(x); });

  ForestConfig forest_config;
  forest_config.n_trees = 100;
  forest_config.seed = 11;
  RandomForest forest = RandomForest::train(train_x, train_y, 3, forest_config);
  const double rf_acc =
      accuracy([&](const Eigen::VectorXf& x) { return forest.predict(x); });

  check.require(forest.tree_count() == 100, "forest uses 100 estimators");
  check.require(svm_acc >= floor + 0.20, "SVM " + std::to_string(svm_acc) +
                                             " vs floor " +
                                             std::to_string(floor));
  check.require(rf_acc >= floor + 0.20, "RF " + std::to_string(rf_acc) +
                                            " vs floor " +
                                            std::to_string(floor));

  std::ostringstream detail;
  detail << std::fixed << std::setprecision(3) << "SVM " << svm_acc << ", RF "
         << rf_acc << " vs most-frequent floor " << floor
         << " (+0.20 required)";
  report(5, "baseline-floor", check.ok,
         check.ok ? detail.str() : check.detail.str());
}

// --- criterion 6: matcher properties -----------------------------------------

void criterion_matcher() {
  Check check;
  StubEncoder encoder;
  SplitMix64 rng(112233);

  std::size_t pair_checks = 0;
  double max_abs_err = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    Story a =
        random_story("a" + std::to_string(rep), 1 + rng.uniform_index(10), rng);
    Story b =
        random_story("b" + std::to_string(rep), 1 + rng.uniform_index(10), rng);

    for (auto aspect : {std::optional<ClauseType>{},
                        std::optional<ClauseType>{ClauseType::Action},
                        std::optional<ClauseType>{ClauseType::Evaluation},
                        std::optional<ClauseType>{ClauseType::Orientation}}) {
      auto expected = pair_score_ref(a, b, aspect, encoder);
      if (!expected) {
        bool threw = false;
        try {
          pair_score(a, b, aspect, encoder);
        } catch (const DataError&) {
          threw = true;
        }
        check.require(threw, "absent aspect raises an error, not 0");
        continue;
      }
      PairScore ab = pair_score(a, b, aspect, encoder);
      PairScore ba = pair_score(b, a, aspect, encoder);
      check.require(ab.score == ba.score, "exact symmetry");
      check.require(ab.score >= -1.0 - 1e-9 && ab.score <= 1.0 + 1e-9,
                    "bounds [-1, 1]");
      max_abs_err = std::max(max_abs_err, std::abs(ab.score - *expected));
      check.require(std::abs(ab.score - *expected) < 1e-9,
                    "brute-force equivalence");
      ++pair_checks;
    }

    for (ClauseType aspect : kClassifierLabelOrder) {
      try {
        PairScore self = pair_score(a, a, aspect, encoder);
        check.require(std::abs(self.score - 1.0) <= 1e-9, "self-similarity 1");
      } catch (const DataError&) {
      }
    }
  }
  check.require(pair_checks >= 200, "at least 200 scored pairs (" +
                                        std::to_string(pair_checks) + ")");

  // duplicate-clause invariance, exact
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<Eigen::VectorXf> s, t;
    for (int i = 0; i < 5; ++i) {
      s.push_back(encoder.encode("s" + std::to_string(rng.next())));
      t.push_back(encoder.encode("t" + std::to_string(rng.next())));
    }
    const double base = directed_score(s, t);
    auto extended = t;
    extended.push_back(t[rng.uniform_index(t.size())]);
    check.require(directed_score(s, extended) == base,
                  "duplicate-clause invariance exact");
  }

  // distractor selection equals exhaustive search
  std::size_t distractor_checks = 0;
  for (int rep = 0; rep < 15; ++rep) {
    std::vector<Story> corpus;
    for (int s = 0; s < 8; ++s) {
      corpus.push_back(
          random_story("s" + std::to_string(s), 2 + rng.uniform_index(5), rng));
    }
    const double threshold = 0.1;
    for (ClauseType aspect : kClassifierLabelOrder) {
      std::string best_id;
      double best_off = 0.0;
      bool found = false;
      for (const Story& candidate : corpus) {
        if (candidate.story_id == corpus[0].story_id) continue;
        auto target = pair_score_ref(corpus[0], candidate, aspect, encoder);
        if (!target || *target < threshold) continue;
        double off = -1.0;
        for (ClauseType other : kClassifierLabelOrder) {
          if (other == aspect) continue;
          auto score = pair_score_ref(corpus[0], candidate, other, encoder);
          if (score && *score > off) off = *score;
        }
        if (!found || off < best_off ||
            (off == best_off && candidate.story_id < best_id)) {
          found = true;
          best_off = off;
          best_id = candidate.story_id;
        }
      }
      if (!found) {
        bool threw = false;
        try {
          select_distractor_story(corpus, corpus[0].story_id, aspect, encoder,
                                  threshold);
        } catch (const DataError&) {
          threw = true;
        }
        check.require(threw, "no-candidate case raises an error");
      } else {
        check.require(
            select_distractor_story(corpus, corpus[0].story_id, aspect, encoder,
                                    threshold) == best_id,
            "distractor equals exhaustive search");
        ++distractor_checks;
      }
    }
  }

  std::ostringstream detail;
  detail << pair_checks << " random pairs match brute force (max abs err "
         << std::scientific << std::setprecision(1) << max_abs_err
         << "); symmetry exact; self-similarity within 1e-9; duplicate "
         << "invariance exact; " << distractor_checks
         << " distractor selections equal exhaustive search";
  report(6, "matcher-properties", check.ok,
         check.ok ? detail.str() : check.detail.str());
}

// --- criterion 7: report layouts ---------------------------------------------

ChoiceRecord toy_record(const std::string& main, ClauseType aspect,
                        bool detected,
                        std::optional<std::set<ClauseType>> mentions) {
  ChoiceRecord r;
  r.main_story = main;
  r.matched_story = "matched-" + main;
  r.random_story = "random-" + main;
  r.matched_aspect = aspect;
  r.presentation_order = "AB";
  r.chosen = detected ? r.matched_story : r.random_story;
  r.mapped_aspects = std::move(mentions);
  return r;
}

void criterion_reports() {
  Check check;

  // toy set 1: detection percentages computed by hand
  // action: 3 of 4 detected (75%), evaluation: 1 of 2 (50%), orientation: 0/1
  std::vector<ChoiceRecord> set1;
  set1.push_back(toy_record("a1", ClauseType::Action, true, std::nullopt));
  set1.push_back(toy_record("a2", ClauseType::Action, true, std::nullopt));
  set1.push_back(toy_record("a3", ClauseType::Action, true, std::nullopt));
  set1.push_back(toy_record("a4", ClauseType::Action, false, std::nullopt));
  set1.push_back(toy_record("e1", ClauseType::Evaluation, true, std::nullopt));
  set1.push_back(toy_record("e2", ClauseType::Evaluation, false, std::nullopt));
  set1.push_back(toy_record("o1", ClauseType::Orientation, false, std::nullopt));
  auto rows = detection_report(set1);
  check.require(rows.size() == 3, "three aspect rows");
  check.require(rows[0].aspect == ClauseType::Action && rows[0].records == 4 &&
                    rows[0].detected == 3 &&
                    std::abs(rows[0].percent - 75.0) < 1e-12,
                "action row 75%");
  check.require(rows[1].records == 2 && std::abs(rows[1].percent - 50.0) < 1e-12,
                "evaluation row 50%");
  check.require(rows[2].records == 1 && rows[2].percent == 0.0,
                "orientation row 0%");
  const std::string table = format_detection_table(rows);
  check.require(table.find("Match only at") != std::string::npos &&
                    table.find("% of times detected") != std::string::npos,
                "detection header mirrors the table layout");
  check.require(table.find("75.0%") != std::string::npos, "detection cell");
  const std::string csv = format_detection_csv(rows);
  check.require(csv.rfind("aspect,records,detected,percent\n", 0) == 0,
                "detection CSV header");
  check.require(csv.find("action,4,3,75.0") != std::string::npos,
                "detection CSV row");

  // toy set 2: every pair mentions only its own aspect -> identity pattern
  std::vector<ChoiceRecord> set2;
  for (ClauseType t : kClassifierLabelOrder) {
    set2.push_back(
        toy_record("m-" + to_string(t), t, true, std::set<ClauseType>{t}));
  }
  auto matrix2 = aspect_mention_report(set2);
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      check.require(
          std::abs(matrix2.percent[r][c] - (r == c ? 100.0 : 0.0)) < 1e-12,
          "identity pattern cell");
    }
  }

  // toy set 3: hand-computed mixed percentages
  // action row: pairs p1 (mentions action+evaluation) and p2 (action only)
  //   -> action 100%, evaluation 50%, orientation 0%
  // evaluation row: pair p3 with two explanations covering evaluation and
  //   orientation -> action 0%, evaluation 100%, orientation 100%
  std::vector<ChoiceRecord> set3;
  set3.push_back(toy_record(
      "p1", ClauseType::Action, true,
      std::set<ClauseType>{ClauseType::Action, ClauseType::Evaluation}));
  set3.push_back(toy_record("p2", ClauseType::Action, false,
                            std::set<ClauseType>{ClauseType::Action}));
  set3.push_back(toy_record("p3", ClauseType::Evaluation, true,
                            std::set<ClauseType>{ClauseType::Evaluation}));
  set3.push_back(toy_record("p3", ClauseType::Evaluation, true,
                            std::set<ClauseType>{ClauseType::Orientation}));
  auto matrix3 = aspect_mention_report(set3);
  check.require(matrix3.row_pairs[0] == 2 && matrix3.row_pairs[1] == 1,
                "pair grouping");
  check.require(std::abs(matrix3.percent[0][0] - 100.0) < 1e-12 &&
                    std::abs(matrix3.percent[0][1] - 50.0) < 1e-12 &&
                    matrix3.percent[0][2] == 0.0,
                "action row hand values");
  check.require(matrix3.percent[1][0] == 0.0 &&
                    std::abs(matrix3.percent[1][1] - 100.0) < 1e-12 &&
                    std::abs(matrix3.percent[1][2] - 100.0) < 1e-12,
                "evaluation row hand values");
  const std::string mention_table = format_mention_table(matrix3);
  check.require(mention_table.find("Match at") != std::string::npos,
                "mention header mirrors the matrix layout");
  for (const std::string label : {"action", "evaluation", "orientation"}) {
    check.require(mention_table.find(label) != std::string::npos,
                  "mention header column " + label);
  }
  const std::string mention_csv = format_mention_csv(matrix3);
  check.require(
      mention_csv.rfind("match_at,action,evaluation,orientation\n", 0) == 0,
      "mention CSV header");
  check.require(mention_csv.find("action,100.0,50.0,0.0") != std::string::npos,
                "mention CSV row");

  report(7, "report-layouts", check.ok,
         check.ok ? "detection and aspect-mention reports reproduce the "
                    "experiment table layouts with hand-computed values on 3 "
                    "toy record sets"
                  : check.detail.str());
}

}  // namespace

int main() {
  std::cout << "acceptance suite\n================\n";
  criterion_segmentation();
  criterion_aggregation();
  criterion_classifier();
  criterion_headline_or_fallback();
  criterion_baselines();
  criterion_matcher();
  criterion_reports();
  std::cout << (g_failures == 0
                    ? "ALL CRITERIA PASSED"
                    : std::to_string(g_failures) + " CRITERIA FAILED")
            << "\n";
  return g_failures == 0 ? 0 : 1;
}
