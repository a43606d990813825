// Command-line pipeline: clause segmentation, gold-label aggregation, corpus
// statistics, classifier training/evaluation, and story matching. Every
// subcommand is deterministic given --seed and its input files.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include <nlohmann/json.hpp>

#include "narrative/baselines.hpp"
#include "narrative/checkpoint.hpp"
#include "narrative/cnn.hpp"
#include "narrative/corpus.hpp"
#include "narrative/eval.hpp"
#include "narrative/features.hpp"
#include "narrative/matcher.hpp"
#include "narrative/rng.hpp"
#include "narrative/treebank.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace narrative;

namespace {

std::string pct(double fraction) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(1) << fraction * 100.0 << "%";
  return out.str();
}

void write_resolved_config(const fs::path& where, const std::string& command,
                           const json& values) {
  json resolved;
  resolved["command"] = command;
  resolved["options"] = values;
  std::ofstream out(where);
  if (!out) throw DataError("cannot write resolved config: " + where.string());
  out << resolved.dump(2) << "\n";
}

fs::path config_sibling(const fs::path& output) {
  fs::path p = output;
  p += ".config.json";
  return p;
}

struct EncoderOptions {
  std::string backend = "average";  // average | precomputed
  std::string file;
  int dim = 300;

  std::unique_ptr<SentenceEncoder> build() const {
    if (file.empty()) {
      throw DataError("--encoder-file is required for story matching");
    }
    if (backend == "average") {
      return std::make_unique<WordAveragingEncoder>(
          WordAveragingEncoder::from_file(file, dim));
    }
    if (backend == "precomputed") {
      return std::make_unique<PrecomputedEncoder>(
          PrecomputedEncoder::from_file(file));
    }
    throw DataError("unknown encoder backend: " + backend);
  }
};

std::optional<ClauseType> parse_aspect(const std::string& name) {
  if (name == "all") return std::nullopt;
  ClauseType t = clause_type_from_string(name);
  if (t == ClauseType::NotStory) {
    throw DataError("not_story is not a matchable aspect");
  }
  return t;
}

// Label clauses for matching: gold aggregation or checkpoint predictions.
std::string label_clauses(std::vector<Story>& corpus,
                          const std::string& labels, std::uint64_t seed,
                          const std::string& checkpoint_dir) {
  if (labels == "gold") {
    aggregate_corpus(corpus, seed);
    return "gold";
  }
  if (labels != "predicted") {
    throw DataError("--labels must be gold or predicted");
  }
  if (checkpoint_dir.empty()) {
    throw DataError("--checkpoint is required with --labels predicted");
  }
  auto checkpoint = load_checkpoint(checkpoint_dir);
  FeatureConfig fc;
  fc.embedding_dim = checkpoint.model.config().embedding_dim;
  fc.pos_dim = checkpoint.model.config().pos_dim;
  fc.use_pos = checkpoint.model.config().use_pos;
  for (Story& story : corpus) {
    for (Clause& clause : story.clauses) {
      EncodedClause encoded =
          encode_clause(clause, checkpoint.vocab, checkpoint.tagset, fc);
      clause.gold = class_label(checkpoint.model.predict_encoded(encoded));
      clause.agreement = 0;
    }
  }
  return "predicted";
}

const Story& find_story(const std::vector<Story>& corpus,
                        const std::string& id) {
  for (const Story& s : corpus) {
    if (s.story_id == id) return s;
  }
  throw DataError("story not found in corpus: " + id);
}

json eval_report_json(const EvalReport& report) {
  json j;
  j["micro_f1"] = report.micro_f1;
  j["macro_f1"] = report.macro_f1;
  j["n_examples"] = report.n_examples;
  j["agreement_filter"] = report.agreement_filter;
  for (std::size_t c = 0; c < 3; ++c) {
    const std::string name = to_string(kClassifierLabelOrder[c]);
    j["per_class"][name] = {{"precision", report.precision[c]},
                            {"recall", report.recall[c]},
                            {"f1", report.f1[c]}};
  }
  j["confusion"] = report.confusion;
  j["label_order"] = {"action", "evaluation", "orientation"};
  return j;
}

void print_eval_report(const EvalReport& report) {
  std::cout << "micro-F1 " << pct(report.micro_f1) << " on "
            << report.n_examples << " clauses (agreement filter "
            << report.agreement_filter << "); macro-F1 "
            << pct(report.macro_f1) << "\n";
  for (std::size_t c = 0; c < 3; ++c) {
    std::cout << "  " << std::left << std::setw(12)
              << to_string(kClassifierLabelOrder[c])
              << " P " << pct(report.precision[c]) << "  R "
              << pct(report.recall[c]) << "  F1 " << pct(report.f1[c]) << "\n";
  }
}

// ---------------------------------------------------------------------------

int cmd_split(const std::string& trees_path, const std::string& output_path) {
  auto stories = load_tree_file(trees_path);
  std::ofstream out(output_path);
  if (!out) throw DataError("cannot open output file: " + output_path);
  std::size_t clause_total = 0;
  for (const TreeStory& story : stories) {
    auto spans = segment_story(story.trees);
    int index = 0;
    for (const ClauseSpan& span : spans) {
      json record;
      record["story_id"] = story.story_id;
      record["clause_index"] = index++;
      record["source_sentence"] = span.source_sentence;
      std::string text;
      json tokens = json::array();
      json pos = json::array();
      for (const Token& t : span.tokens) {
        if (!text.empty()) text += ' ';
        text += t.text;
        tokens.push_back(t.text);
        pos.push_back(t.pos ? json(*t.pos) : json(nullptr));
      }
      record["text"] = text;
      record["tokens"] = std::move(tokens);
      record["pos"] = std::move(pos);
      record["covered_labels"] = span.covered_node_labels;
      out << record.dump() << "\n";
      ++clause_total;
    }
  }
  write_resolved_config(config_sibling(output_path), "split",
                        {{"trees", trees_path}, {"output", output_path}});
  std::cout << "split " << stories.size() << " stories into " << clause_total
            << " clauses -> " << output_path << "\n";
  return 0;
}

int cmd_aggregate(const std::string& corpus_path, std::uint64_t seed,
                  const std::string& output_path) {
  auto corpus = load_corpus(corpus_path);
  aggregate_corpus(corpus, seed);

  auto dist = label_distribution(corpus);
  auto counts = agreement_counts(corpus);
  std::cout << "Label distribution (" << clause_count(corpus) << " clauses, "
            << corpus.size() << " stories)\n";
  for (ClauseType t : kAllClauseTypes) {
    std::ostringstream agreement;
    agreement << std::fixed << std::setprecision(2) << dist[t].mean_agreement;
    std::cout << "  " << std::left << std::setw(12) << to_string(t)
              << pct(dist[t].fraction) << " (" << agreement.str() << ")\n";
  }
  std::cout << "agreement >= 2: " << counts.at_least_two
            << ", agreement = 3: " << counts.exactly_three
            << ", mean agreement: " << std::fixed << std::setprecision(2)
            << counts.mean_agreement << "\n";

  if (!output_path.empty()) {
    write_corpus(corpus, output_path);
    write_resolved_config(config_sibling(output_path), "aggregate",
                          {{"corpus", corpus_path},
                           {"seed", seed},
                           {"output", output_path}});
    std::cout << "aggregated corpus -> " << output_path << "\n";
  }
  return 0;
}

int cmd_stats(const std::string& corpus_path, std::size_t top_k,
              const std::string& query_word, const std::string& output_path) {
  auto corpus = load_corpus(corpus_path);
  auto report = corpus_stats(corpus, top_k, query_word);
  std::cout << report.story_count << " stories, " << report.clause_count
            << " clauses, " << report.token_count << " tokens\n"
            << std::fixed << std::setprecision(2) << "mean clauses/story "
            << report.mean_clauses_per_story << ", mean tokens/clause "
            << report.mean_tokens_per_clause << "\n"
            << "\"" << report.query_word << "\" appears "
            << report.query_word_mean_per_story << " times per story\n"
            << "top bigrams:\n";
  for (const BigramStat& b : report.top_bigrams) {
    std::cout << "  " << b.first << " " << b.second << "  " << b.count << " ("
              << pct(b.fraction) << " of bigrams)\n";
  }
  if (!output_path.empty()) {
    json j;
    j["story_count"] = report.story_count;
    j["clause_count"] = report.clause_count;
    j["token_count"] = report.token_count;
    j["bigram_total"] = report.bigram_total;
    j["mean_clauses_per_story"] = report.mean_clauses_per_story;
    j["mean_tokens_per_clause"] = report.mean_tokens_per_clause;
    j["query_word"] = report.query_word;
    j["query_word_mean_per_story"] = report.query_word_mean_per_story;
    j["top_bigrams"] = json::array();
    for (const BigramStat& b : report.top_bigrams) {
      j["top_bigrams"].push_back({{"first", b.first},
                                  {"second", b.second},
                                  {"count", b.count},
                                  {"fraction", b.fraction}});
    }
    std::ofstream out(output_path);
    if (!out) throw DataError("cannot open output file: " + output_path);
    out << j.dump(2) << "\n";
  }
  return 0;
}

struct TrainCliOptions {
  std::string corpus;
  std::string embeddings;
  std::string tagset;
  std::string out_dir;
  std::uint64_t seed = 0;
  int min_agreement = 2;
  bool keep_not_story = false;
  std::vector<double> fractions = {0.86, 0.07, 0.07};
  double learning_rate = 5e-5;
  int batch_size = 64;
  int epochs = 60;
  int patience = 5;
  double dropout = 0.3;
  int filters = 30;
  bool no_pos = false;
  int embedding_dim = 300;
};

int cmd_train(const TrainCliOptions& options) {
  auto corpus = load_corpus(options.corpus);
  aggregate_corpus(corpus, options.seed);

  SplitOptions split_options;
  if (options.fractions.size() != 3) {
    throw DataError("--fractions needs exactly three values");
  }
  split_options.fractions = {options.fractions[0], options.fractions[1],
                             options.fractions[2]};
  split_options.min_agreement = options.min_agreement;
  split_options.drop_not_story = !options.keep_not_story;
  split_options.seed = options.seed;
  DatasetSplit split = split_dataset(corpus, split_options);

  auto train_clauses = collect_clauses(corpus, split.train);
  auto val_clauses = collect_clauses(corpus, split.validation);

  FeatureConfig fc;
  fc.embedding_dim = options.embedding_dim;
  fc.use_pos = !options.no_pos;
  Vocabulary vocab = Vocabulary::build(train_clauses, fc.min_count);
  PosTagset tagset = options.tagset.empty()
                         ? PosTagset::penn_treebank()
                         : PosTagset::from_file(options.tagset);
  LoadedEmbeddings embeddings = load_embeddings(
      options.embeddings, vocab, splitmix64(options.seed), fc.embedding_dim);
  std::cout << "vocabulary " << vocab.size() << " tokens, pretrained coverage "
            << pct(embeddings.coverage()) << "\n";

  CnnConfig config;
  config.filters_per_width = options.filters;
  config.dropout = options.dropout;
  config.embedding_dim = fc.embedding_dim;
  config.pos_dim = fc.pos_dim;
  config.use_pos = fc.use_pos;
  CnnModel model(config, embeddings.table.rows,
                 derive_seed("model-init", options.seed));

  auto train_set = encode_clauses(train_clauses, vocab, tagset, fc);
  auto val_set = encode_clauses(val_clauses, vocab, tagset, fc);

  TrainConfig tc;
  tc.learning_rate = options.learning_rate;
  tc.batch_size = options.batch_size;
  tc.max_epochs = options.epochs;
  tc.patience = options.patience;
  tc.seed = options.seed;
  TrainLog log = train(model, train_set, val_set, tc);

  fs::create_directories(options.out_dir);
  TrainMeta meta;
  meta.seed = options.seed;
  meta.fractions = split_options.fractions;
  meta.min_agreement = options.min_agreement;
  meta.drop_not_story = split_options.drop_not_story;
  save_checkpoint(model, vocab, tagset, meta, options.out_dir);

  json log_json;
  log_json["train_loss"] = log.train_loss;
  log_json["val_error"] = log.val_error;
  log_json["best_epoch"] = log.best_epoch;
  log_json["epochs_run"] = log.epochs_run;
  log_json["split_sizes"] = {{"train", split.train.size()},
                             {"validation", split.validation.size()},
                             {"test", split.test.size()}};
  {
    std::ofstream out(fs::path(options.out_dir) / "training_log.json");
    out << log_json.dump(2) << "\n";
  }
  {
    json split_json;
    split_json["seed"] = split.seed;
    split_json["train"] = split.train;
    split_json["validation"] = split.validation;
    split_json["test"] = split.test;
    std::ofstream out(fs::path(options.out_dir) / "split.json");
    out << split_json.dump() << "\n";
  }
  write_resolved_config(
      fs::path(options.out_dir) / "run_config.json", "train",
      {{"corpus", options.corpus},
       {"embeddings", options.embeddings},
       {"tagset", options.tagset},
       {"out_dir", options.out_dir},
       {"seed", options.seed},
       {"min_agreement", options.min_agreement},
       {"drop_not_story", split_options.drop_not_story},
       {"fractions", options.fractions},
       {"learning_rate", options.learning_rate},
       {"batch_size", options.batch_size},
       {"epochs", options.epochs},
       {"patience", options.patience},
       {"dropout", options.dropout},
       {"filters", options.filters},
       {"use_pos", fc.use_pos},
       {"embedding_dim", options.embedding_dim}});

  std::cout << "trained " << log.epochs_run << " epochs ("
            << split.train.size() << "/" << split.validation.size() << "/"
            << split.test.size() << " train/val/test clauses); best epoch "
            << log.best_epoch + 1 << ", validation error "
            << pct(log.val_error[static_cast<std::size_t>(log.best_epoch)])
            << " -> " << options.out_dir << "\n";
  return 0;
}

int cmd_evaluate(const std::string& corpus_path,
                 const std::string& checkpoint_dir, int agreement,
                 const std::string& report_path) {
  auto checkpoint = load_checkpoint(checkpoint_dir);
  auto corpus = load_corpus(corpus_path);
  aggregate_corpus(corpus, checkpoint.meta.seed);

  SplitOptions split_options;
  split_options.fractions = checkpoint.meta.fractions;
  split_options.min_agreement = checkpoint.meta.min_agreement;
  split_options.drop_not_story = checkpoint.meta.drop_not_story;
  split_options.seed = checkpoint.meta.seed;
  DatasetSplit split = split_dataset(corpus, split_options);
  auto test_clauses = collect_clauses(corpus, split.test);

  FeatureConfig fc;
  fc.embedding_dim = checkpoint.model.config().embedding_dim;
  fc.pos_dim = checkpoint.model.config().pos_dim;
  fc.use_pos = checkpoint.model.config().use_pos;
  auto test_set =
      encode_clauses(test_clauses, checkpoint.vocab, checkpoint.tagset, fc);

  EvalReport report = evaluate(
      [&](const EncodedClause& clause) {
        return checkpoint.model.predict_encoded(clause);
      },
      test_set, agreement);
  print_eval_report(report);

  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) throw DataError("cannot open report file: " + report_path);
    out << eval_report_json(report).dump(2) << "\n";
    write_resolved_config(config_sibling(report_path), "evaluate",
                          {{"corpus", corpus_path},
                           {"checkpoint", checkpoint_dir},
                           {"agreement", agreement},
                           {"report", report_path}});
  }
  return 0;
}

int cmd_predict(const std::string& corpus_path,
                const std::string& checkpoint_dir,
                const std::string& output_path) {
  auto checkpoint = load_checkpoint(checkpoint_dir);
  auto corpus = load_corpus(corpus_path);
  FeatureConfig fc;
  fc.embedding_dim = checkpoint.model.config().embedding_dim;
  fc.pos_dim = checkpoint.model.config().pos_dim;
  fc.use_pos = checkpoint.model.config().use_pos;

  std::ofstream out(output_path);
  if (!out) throw DataError("cannot open output file: " + output_path);
  std::size_t n = 0;
  for (const Story& story : corpus) {
    for (const Clause& clause : story.clauses) {
      EncodedClause encoded =
          encode_clause(clause, checkpoint.vocab, checkpoint.tagset, fc);
      auto probs = checkpoint.model.forward_encoded(encoded);
      const int predicted = CnnModel::argmax(probs);
      json record;
      record["clause_id"] = clause.clause_id;
      record["predicted"] = to_string(class_label(predicted));
      json p = json::array();
      for (int c = 0; c < probs.size(); ++c) p.push_back(probs(c));
      record["probabilities"] = std::move(p);
      out << record.dump() << "\n";
      ++n;
    }
  }
  write_resolved_config(config_sibling(output_path), "predict",
                        {{"corpus", corpus_path},
                         {"checkpoint", checkpoint_dir},
                         {"output", output_path}});
  std::cout << "predicted " << n << " clauses -> " << output_path << "\n";
  return 0;
}

int cmd_match(const std::string& corpus_path, const std::string& story_a,
              const std::string& story_b, const std::string& aspect_name,
              const EncoderOptions& encoder_options, const std::string& labels,
              std::uint64_t seed, const std::string& checkpoint_dir,
              const std::string& output_path) {
  auto corpus = load_corpus(corpus_path);
  const std::string source = label_clauses(corpus, labels, seed, checkpoint_dir);
  auto encoder = encoder_options.build();
  auto aspect = parse_aspect(aspect_name);

  PairScore score = pair_score(find_story(corpus, story_a),
                               find_story(corpus, story_b), aspect, *encoder);
  score.label_source = source;
  std::cout << "pair_score(" << story_a << ", " << story_b << ", "
            << aspect_name << ") = " << std::fixed << std::setprecision(4)
            << score.score << " [labels: " << source
            << ", encoder: " << encoder->name() << "]\n";

  if (!output_path.empty()) {
    json j;
    j["story_a"] = score.story_a;
    j["story_b"] = score.story_b;
    j["aspect"] = aspect_name;
    j["score"] = score.score;
    j["label_source"] = score.label_source;
    j["encoder"] = encoder->name();
    auto dump_alignments = [](const std::vector<ClauseAlignment>& alignments) {
      json arr = json::array();
      for (const ClauseAlignment& a : alignments) {
        arr.push_back(
            {{"from", a.from_index}, {"to", a.to_index}, {"cosine", a.cosine}});
      }
      return arr;
    };
    j["a_to_b"] = dump_alignments(score.a_to_b);
    j["b_to_a"] = dump_alignments(score.b_to_a);
    std::ofstream out(output_path);
    if (!out) throw DataError("cannot open output file: " + output_path);
    out << j.dump(2) << "\n";
    write_resolved_config(config_sibling(output_path), "match",
                          {{"corpus", corpus_path},
                           {"story_a", story_a},
                           {"story_b", story_b},
                           {"aspect", aspect_name},
                           {"labels", labels},
                           {"seed", seed}});
  }
  return 0;
}

int cmd_select_pairs(const std::string& corpus_path,
                     const std::string& aspect_name, double threshold,
                     std::size_t max_pairs, std::uint64_t seed, int jobs,
                     const EncoderOptions& encoder_options,
                     const std::string& labels,
                     const std::string& checkpoint_dir,
                     const std::string& distractor_anchor,
                     const std::string& output_path) {
  auto corpus = load_corpus(corpus_path);
  const std::string source = label_clauses(corpus, labels, seed, checkpoint_dir);
  auto encoder = encoder_options.build();
  auto aspect = parse_aspect(aspect_name);
  if (!aspect) throw DataError("select-pairs needs a concrete aspect");

  if (!distractor_anchor.empty()) {
    std::string distractor = select_distractor_story(
        corpus, distractor_anchor, *aspect, *encoder, threshold);
    std::cout << "distractor for " << distractor_anchor << " at " << aspect_name
              << ": " << distractor << "\n";
    if (!output_path.empty()) {
      std::ofstream out(output_path);
      if (!out) throw DataError("cannot open output file: " + output_path);
      out << json{{"anchor", distractor_anchor},
                  {"aspect", aspect_name},
                  {"distractor", distractor}}
                 .dump()
          << "\n";
    }
    return 0;
  }

  SelectOptions options;
  options.threshold = threshold;
  options.max_pairs = max_pairs;
  options.seed = seed;
  options.jobs = jobs;
  auto pairs = select_exclusive_pairs(corpus, *aspect, *encoder, options);
  std::cout << "selected " << pairs.size() << " pairs exclusively matched at "
            << aspect_name << " (threshold " << threshold << ", labels "
            << source << ")\n";
  if (!output_path.empty()) {
    std::ofstream out(output_path);
    if (!out) throw DataError("cannot open output file: " + output_path);
    for (const MatchedPair& pair : pairs) {
      out << json{{"story", pair.story},
                  {"matched", pair.matched_story},
                  {"aspect", aspect_name},
                  {"score", pair.score}}
                 .dump()
          << "\n";
    }
    write_resolved_config(config_sibling(output_path), "select-pairs",
                          {{"corpus", corpus_path},
                           {"aspect", aspect_name},
                           {"threshold", threshold},
                           {"n", max_pairs},
                           {"seed", seed},
                           {"labels", labels}});
  }
  return 0;
}

int cmd_report(const std::string& records_path, const std::string& kind,
               const std::string& csv_path) {
  auto records = load_choice_records(records_path);
  std::string table, csv;
  if (kind == "detection") {
    auto rows = detection_report(records);
    table = format_detection_table(rows);
    csv = format_detection_csv(rows);
  } else if (kind == "aspects") {
    auto matrix = aspect_mention_report(records);
    table = format_mention_table(matrix);
    csv = format_mention_csv(matrix);
  } else {
    throw DataError("unknown report kind: " + kind +
                    " (expected detection or aspects)");
  }
  std::cout << table;
  if (!csv_path.empty()) {
    std::ofstream out(csv_path);
    if (!out) throw DataError("cannot open csv file: " + csv_path);
    out << csv;
    write_resolved_config(
        config_sibling(csv_path), "report",
        {{"records", records_path}, {"kind", kind}, {"csv", csv_path}});
  }
  return 0;
}

// config file lookup: cfg[command][key], then cfg[key], then the default
template <typename T>
T cfg_value(const json& cfg, const std::string& command, const std::string& key,
            T fallback) {
  if (cfg.contains(command) && cfg[command].contains(key)) {
    return cfg[command][key].get<T>();
  }
  if (cfg.contains(key)) return cfg[key].get<T>();
  return fallback;
}

}  // namespace

int main(int argc, char** argv) {
  // --config is honored before regular parsing so flags can override it
  json cfg = json::object();
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      std::ifstream in(argv[i + 1]);
      if (!in) {
        std::cerr << "error: cannot open config file " << argv[i + 1] << "\n";
        return 2;
      }
      try {
        in >> cfg;
      } catch (const json::exception& e) {
        std::cerr << "error: invalid config JSON: " << e.what() << "\n";
        return 2;
      }
    }
  }

  CLI::App app{"clause segmentation, Labov clause-type classification, and "
               "aspect-restricted story matching"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file with defaults");

  int exit_code = 0;
  auto run = [&](auto&& fn) {
    try {
      exit_code = fn();
    } catch (const DataError& e) {
      std::cerr << "error: " << e.what() << "\n";
      exit_code = 2;
    } catch (const std::exception& e) {
      std::cerr << "internal error: " << e.what() << "\n";
      exit_code = 3;
    }
  };

  // split
  auto* split = app.add_subcommand("split", "segment parse trees into clauses");
  auto split_trees = std::make_shared<std::string>(
      cfg_value<std::string>(cfg, "split", "trees", ""));
  auto split_out = std::make_shared<std::string>(
      cfg_value<std::string>(cfg, "split", "output", ""));
  split->add_option("--trees", *split_trees, "bracketed tree file")->required();
  split->add_option("--output", *split_out, "clauses JSONL output")->required();
  split->callback([&, split_trees, split_out] {
    run([&] { return cmd_split(*split_trees, *split_out); });
  });

  // aggregate
  auto* aggregate =
      app.add_subcommand("aggregate", "derive gold labels by majority vote");
  auto agg_corpus = std::make_shared<std::string>();
  auto agg_out = std::make_shared<std::string>(
      cfg_value<std::string>(cfg, "aggregate", "output", ""));
  auto agg_seed = std::make_shared<std::uint64_t>(
      cfg_value<std::uint64_t>(cfg, "aggregate", "seed", 0));
  aggregate->add_option("--corpus", *agg_corpus, "corpus JSONL")->required();
  aggregate->add_option("--seed", *agg_seed, "tie-break seed");
  aggregate->add_option("--output", *agg_out, "aggregated corpus output");
  aggregate->callback([&, agg_corpus, agg_seed, agg_out] {
    run([&] { return cmd_aggregate(*agg_corpus, *agg_seed, *agg_out); });
  });

  // stats
  auto* stats = app.add_subcommand("stats", "corpus statistics");
  auto stats_corpus = std::make_shared<std::string>();
  auto stats_topk = std::make_shared<std::size_t>(
      cfg_value<std::size_t>(cfg, "stats", "top_k", 10));
  auto stats_query = std::make_shared<std::string>(
      cfg_value<std::string>(cfg, "stats", "query_word", "you"));
  auto stats_out = std::make_shared<std::string>();
  stats->add_option("--corpus", *stats_corpus, "corpus JSONL")->required();
  stats->add_option("--top-k", *stats_topk, "bigrams to show");
  stats->add_option("--query-word", *stats_query, "per-story frequency word");
  stats->add_option("--output", *stats_out, "JSON report output");
  stats->callback([&, stats_corpus, stats_topk, stats_query, stats_out] {
    run([&] {
      return cmd_stats(*stats_corpus, *stats_topk, *stats_query, *stats_out);
    });
  });

  // train
  auto* train_cmd = app.add_subcommand("train", "train the clause classifier");
  auto topts = std::make_shared<TrainCliOptions>();
  topts->seed = cfg_value<std::uint64_t>(cfg, "train", "seed", 0);
  topts->learning_rate = cfg_value<double>(cfg, "train", "learning_rate", 5e-5);
  topts->batch_size = cfg_value<int>(cfg, "train", "batch_size", 64);
  topts->epochs = cfg_value<int>(cfg, "train", "epochs", 60);
  topts->patience = cfg_value<int>(cfg, "train", "patience", 5);
  topts->dropout = cfg_value<double>(cfg, "train", "dropout", 0.3);
  topts->filters = cfg_value<int>(cfg, "train", "filters", 30);
  topts->embedding_dim = cfg_value<int>(cfg, "train", "embedding_dim", 300);
  topts->min_agreement = cfg_value<int>(cfg, "train", "min_agreement", 2);
  train_cmd->add_option("--corpus", topts->corpus, "corpus JSONL")->required();
  train_cmd
      ->add_option("--embeddings", topts->embeddings, "pretrained word vectors")
      ->required();
  train_cmd->add_option("--tagset", topts->tagset,
                        "45-tag file (default: built-in PTB tagset)");
  train_cmd->add_option("--out-dir", topts->out_dir, "checkpoint directory")
      ->required();
  train_cmd->add_option("--seed", topts->seed, "pipeline seed");
  train_cmd->add_option("--min-agreement", topts->min_agreement,
                        "clause agreement filter");
  train_cmd->add_flag("--keep-not-story", topts->keep_not_story,
                      "keep not_story clauses (dropped by default)");
  train_cmd
      ->add_option("--fractions", topts->fractions,
                   "train/val/test story fractions")
      ->expected(3);
  train_cmd->add_option("--lr", topts->learning_rate, "Adam learning rate");
  train_cmd->add_option("--batch", topts->batch_size, "batch size");
  train_cmd->add_option("--epochs", topts->epochs, "max epochs");
  train_cmd->add_option("--patience", topts->patience,
                        "early-stopping patience");
  train_cmd->add_option("--dropout", topts->dropout, "dropout rate");
  train_cmd->add_option("--filters", topts->filters, "filters per width");
  train_cmd->add_option("--embedding-dim", topts->embedding_dim,
                        "word vector dimension");
  train_cmd->add_flag("--no-pos", topts->no_pos, "disable POS features");
  train_cmd->callback([&, topts] { run([&] { return cmd_train(*topts); }); });

  // evaluate
  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "score a checkpoint on the test split");
  auto eval_corpus = std::make_shared<std::string>();
  auto eval_ckpt = std::make_shared<std::string>();
  auto eval_agreement =
      std::make_shared<int>(cfg_value<int>(cfg, "evaluate", "agreement", 3));
  auto eval_report_path = std::make_shared<std::string>();
  evaluate_cmd->add_option("--corpus", *eval_corpus, "corpus JSONL")->required();
  evaluate_cmd->add_option("--checkpoint", *eval_ckpt, "checkpoint directory")
      ->required();
  evaluate_cmd
      ->add_option("--agreement", *eval_agreement,
                   "2 keeps agreement >= 2; 3 keeps exactly 3")
      ->check(CLI::IsMember({2, 3}));
  evaluate_cmd->add_option("--report", *eval_report_path, "JSON report output");
  evaluate_cmd->callback(
      [&, eval_corpus, eval_ckpt, eval_agreement, eval_report_path] {
        run([&] {
          return cmd_evaluate(*eval_corpus, *eval_ckpt, *eval_agreement,
                              *eval_report_path);
        });
      });

  // predict
  auto* predict_cmd =
      app.add_subcommand("predict", "label every clause in a corpus");
  auto pred_corpus = std::make_shared<std::string>();
  auto pred_ckpt = std::make_shared<std::string>();
  auto pred_out = std::make_shared<std::string>();
  predict_cmd->add_option("--corpus", *pred_corpus, "corpus JSONL")->required();
  predict_cmd->add_option("--checkpoint", *pred_ckpt, "checkpoint directory")
      ->required();
  predict_cmd->add_option("--output", *pred_out, "predictions JSONL")
      ->required();
  predict_cmd->callback([&, pred_corpus, pred_ckpt, pred_out] {
    run([&] { return cmd_predict(*pred_corpus, *pred_ckpt, *pred_out); });
  });

  // shared encoder options for match/select-pairs
  auto add_encoder_options = [&](CLI::App* cmd,
                                 std::shared_ptr<EncoderOptions> eo,
                                 const std::string& section) {
    eo->backend = cfg_value<std::string>(cfg, section, "encoder", "average");
    eo->dim = cfg_value<int>(cfg, section, "encoder_dim", 300);
    eo->file = cfg_value<std::string>(cfg, section, "encoder_file", "");
    cmd->add_option("--encoder", eo->backend,
                    "encoder backend: average | precomputed");
    cmd->add_option("--encoder-file", eo->file,
                    "word vectors (average) or precomputed clause vectors");
    cmd->add_option("--encoder-dim", eo->dim, "vector dimension (average)");
  };

  // match
  auto* match_cmd = app.add_subcommand("match", "score one story pair");
  auto match_corpus = std::make_shared<std::string>();
  auto match_a = std::make_shared<std::string>();
  auto match_b = std::make_shared<std::string>();
  auto match_aspect = std::make_shared<std::string>(
      cfg_value<std::string>(cfg, "match", "aspect", "all"));
  auto match_labels = std::make_shared<std::string>(
      cfg_value<std::string>(cfg, "match", "labels", "gold"));
  auto match_seed = std::make_shared<std::uint64_t>(
      cfg_value<std::uint64_t>(cfg, "match", "seed", 0));
  auto match_ckpt = std::make_shared<std::string>();
  auto match_out = std::make_shared<std::string>();
  auto match_encoder = std::make_shared<EncoderOptions>();
  match_cmd->add_option("--corpus", *match_corpus, "corpus JSONL")->required();
  match_cmd->add_option("--story-a", *match_a, "first story id")->required();
  match_cmd->add_option("--story-b", *match_b, "second story id")->required();
  match_cmd->add_option("--aspect", *match_aspect,
                        "action | evaluation | orientation | all");
  match_cmd->add_option("--labels", *match_labels, "gold | predicted");
  match_cmd->add_option("--seed", *match_seed, "aggregation seed");
  match_cmd->add_option("--checkpoint", *match_ckpt,
                        "checkpoint (for --labels predicted)");
  match_cmd->add_option("--output", *match_out, "alignment JSON output");
  add_encoder_options(match_cmd, match_encoder, "match");
  match_cmd->callback([&, match_corpus, match_a, match_b, match_aspect,
                       match_encoder, match_labels, match_seed, match_ckpt,
                       match_out] {
    run([&] {
      return cmd_match(*match_corpus, *match_a, *match_b, *match_aspect,
                       *match_encoder, *match_labels, *match_seed, *match_ckpt,
                       *match_out);
    });
  });

  // select-pairs
  auto* select_cmd = app.add_subcommand(
      "select-pairs", "find exclusively matched pairs or a distractor story");
  auto sel_corpus = std::make_shared<std::string>();
  auto sel_aspect = std::make_shared<std::string>();
  auto sel_threshold = std::make_shared<double>(
      cfg_value<double>(cfg, "select-pairs", "threshold", 0.5));
  auto sel_n =
      std::make_shared<std::size_t>(cfg_value<std::size_t>(cfg, "select-pairs", "n", 60));
  auto sel_seed = std::make_shared<std::uint64_t>(
      cfg_value<std::uint64_t>(cfg, "select-pairs", "seed", 0));
  auto sel_labels = std::make_shared<std::string>(
      cfg_value<std::string>(cfg, "select-pairs", "labels", "gold"));
  auto sel_jobs =
      std::make_shared<int>(cfg_value<int>(cfg, "select-pairs", "jobs", 1));
  auto sel_ckpt = std::make_shared<std::string>();
  auto sel_anchor = std::make_shared<std::string>();
  auto sel_out = std::make_shared<std::string>();
  auto sel_encoder = std::make_shared<EncoderOptions>();
  select_cmd->add_option("--corpus", *sel_corpus, "corpus JSONL")->required();
  select_cmd
      ->add_option("--aspect", *sel_aspect, "action | evaluation | orientation")
      ->required();
  select_cmd->add_option("--threshold", *sel_threshold, "similarity threshold");
  select_cmd->add_option("--n", *sel_n, "max pairs to sample");
  select_cmd->add_option("--seed", *sel_seed, "sampling/aggregation seed");
  select_cmd->add_option("--jobs", *sel_jobs, "worker threads for pair scoring");
  select_cmd->add_option("--labels", *sel_labels, "gold | predicted");
  select_cmd->add_option("--checkpoint", *sel_ckpt,
                         "checkpoint (for --labels predicted)");
  select_cmd->add_option("--distractor-anchor", *sel_anchor,
                         "select the distractor story for this anchor instead");
  select_cmd->add_option("--output", *sel_out, "pairs JSONL output");
  add_encoder_options(select_cmd, sel_encoder, "select-pairs");
  select_cmd->callback([&, sel_corpus, sel_aspect, sel_threshold, sel_n,
                        sel_seed, sel_jobs, sel_encoder, sel_labels, sel_ckpt,
                        sel_anchor, sel_out] {
    run([&] {
      return cmd_select_pairs(*sel_corpus, *sel_aspect, *sel_threshold, *sel_n,
                              *sel_seed, *sel_jobs, *sel_encoder, *sel_labels,
                              *sel_ckpt, *sel_anchor, *sel_out);
    });
  });

  // report
  auto* report_cmd =
      app.add_subcommand("report", "summarize forced-choice records");
  auto rep_records = std::make_shared<std::string>();
  auto rep_kind = std::make_shared<std::string>(
      cfg_value<std::string>(cfg, "report", "kind", "detection"));
  auto rep_csv = std::make_shared<std::string>();
  report_cmd->add_option("--records", *rep_records, "ChoiceRecord JSONL")
      ->required();
  report_cmd->add_option("--kind", *rep_kind, "detection | aspects");
  report_cmd->add_option("--csv", *rep_csv, "CSV output path");
  report_cmd->callback([&, rep_records, rep_kind, rep_csv] {
    run([&] { return cmd_report(*rep_records, *rep_kind, *rep_csv); });
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
