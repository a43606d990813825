#include "narrative/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "narrative/rng.hpp"

namespace narrative {

using json = nlohmann::json;

namespace {

bool is_word_char(unsigned char c) {
  return std::isalnum(c) || c == '_' || c >= 0x80;
}

[[noreturn]] void schema_error(std::size_t line, const std::string& what) {
  throw DataError("corpus line " + std::to_string(line) + ": " + what);
}

std::string require_string(const json& j, const char* field, std::size_t line) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_string()) {
    schema_error(line, std::string("missing or non-string field \"") + field +
                           "\"");
  }
  return it->get<std::string>();
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (is_word_char(c)) {
      std::size_t start = i;
      while (i < n) {
        unsigned char cur = static_cast<unsigned char>(text[i]);
        if (is_word_char(cur)) {
          ++i;
        } else if ((cur == '\'' || cur == '-') && i > start && i + 1 < n &&
                   is_word_char(static_cast<unsigned char>(text[i + 1]))) {
          // apostrophe/hyphen flanked by word characters stays in-token
          ++i;
        } else {
          break;
        }
      }
      tokens.emplace_back(text.substr(start, i - start));
    } else {
      tokens.emplace_back(1, text[i]);
      ++i;
    }
  }
  return tokens;
}

std::string case_fold(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::vector<Story> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open corpus file: " + path.string());
  }

  std::vector<Story> corpus;
  std::set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      schema_error(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!record.is_object()) schema_error(line_no, "record is not an object");

    Story story;
    story.story_id = require_string(record, "story_id", line_no);
    if (story.story_id.empty()) schema_error(line_no, "empty story_id");
    if (!seen_ids.insert(story.story_id).second) {
      schema_error(line_no, "duplicate story_id \"" + story.story_id + "\"");
    }
    if (auto it = record.find("speaker_gender");
        it != record.end() && !it->is_null()) {
      if (!it->is_string()) schema_error(line_no, "speaker_gender not a string");
      story.speaker_gender = it->get<std::string>();
    }
    if (auto it = record.find("transcript");
        it != record.end() && !it->is_null()) {
      if (!it->is_string()) schema_error(line_no, "transcript not a string");
      story.transcript = it->get<std::string>();
    }
    if (auto it = record.find("duration_seconds");
        it != record.end() && !it->is_null()) {
      if (!it->is_number()) {
        schema_error(line_no, "duration_seconds not a number");
      }
      story.duration_seconds = it->get<double>();
    }

    auto clauses_it = record.find("clauses");
    if (clauses_it == record.end() || !clauses_it->is_array()) {
      schema_error(line_no, "missing or non-array field \"clauses\"");
    }
    int index = 0;
    for (const json& cj : *clauses_it) {
      if (!cj.is_object()) schema_error(line_no, "clause is not an object");
      Clause clause;
      clause.story_id = story.story_id;
      clause.index = index;
      clause.clause_id = story.story_id + "#" + std::to_string(index);
      clause.text = require_string(cj, "text", line_no);

      if (auto it = cj.find("tokens"); it != cj.end() && !it->is_null()) {
        if (!it->is_array()) schema_error(line_no, "tokens not an array");
        for (const json& t : *it) {
          if (!t.is_string()) schema_error(line_no, "token not a string");
          clause.tokens.push_back(Token{t.get<std::string>(), std::nullopt});
        }
      } else {
        for (std::string& t : tokenize(clause.text)) {
          clause.tokens.push_back(Token{std::move(t), std::nullopt});
        }
      }
      if (clause.tokens.empty()) {
        schema_error(line_no, "clause " + clause.clause_id + " has no tokens");
      }
      for (const Token& t : clause.tokens) {
        if (t.text.empty() ||
            t.text.find_first_of(" \t\n\r") != std::string::npos) {
          schema_error(line_no, "token with whitespace or empty text in " +
                                    clause.clause_id);
        }
      }

      if (auto it = cj.find("pos"); it != cj.end() && !it->is_null()) {
        if (!it->is_array() || it->size() != clause.tokens.size()) {
          schema_error(line_no,
                       "pos array length does not match tokens in " +
                           clause.clause_id);
        }
        for (std::size_t k = 0; k < it->size(); ++k) {
          const json& p = (*it)[k];
          if (!p.is_string()) schema_error(line_no, "pos tag not a string");
          clause.tokens[k].pos = p.get<std::string>();
        }
      }

      auto ann_it = cj.find("annotations");
      if (ann_it != cj.end() && !ann_it->is_null()) {
        if (!ann_it->is_array()) {
          schema_error(line_no, "annotations not an array");
        }
        std::set<std::string> annotators;
        for (const json& aj : *ann_it) {
          if (!aj.is_object()) {
            schema_error(line_no, "annotation is not an object");
          }
          Annotation a;
          a.annotator_id = require_string(aj, "annotator", line_no);
          std::string label = require_string(aj, "label", line_no);
          try {
            a.label = clause_type_from_string(label);
          } catch (const DataError&) {
            schema_error(line_no, "unknown label \"" + label + "\" in " +
                                      clause.clause_id);
          }
          if (!annotators.insert(a.annotator_id).second) {
            schema_error(line_no, "duplicate annotator \"" + a.annotator_id +
                                      "\" in " + clause.clause_id);
          }
          clause.annotations.labels.push_back(std::move(a));
        }
      }
      story.clauses.push_back(std::move(clause));
      ++index;
    }
    corpus.push_back(std::move(story));
  }
  return corpus;
}

void write_corpus(const std::vector<Story>& corpus,
                  const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot open output file: " + path.string());
  }
  for (const Story& story : corpus) {
    json record;
    record["story_id"] = story.story_id;
    record["speaker_gender"] =
        story.speaker_gender ? json(*story.speaker_gender) : json(nullptr);
    if (story.transcript) record["transcript"] = *story.transcript;
    if (story.duration_seconds) {
      record["duration_seconds"] = *story.duration_seconds;
    }
    json clauses = json::array();
    for (const Clause& clause : story.clauses) {
      json cj;
      cj["text"] = clause.text;
      json tokens = json::array();
      json pos = json::array();
      bool any_pos = false;
      for (const Token& t : clause.tokens) {
        tokens.push_back(t.text);
        pos.push_back(t.pos ? json(*t.pos) : json(nullptr));
        any_pos = any_pos || t.pos.has_value();
      }
      cj["tokens"] = std::move(tokens);
      if (any_pos) cj["pos"] = std::move(pos);
      json anns = json::array();
      for (const Annotation& a : clause.annotations.labels) {
        anns.push_back({{"annotator", a.annotator_id},
                        {"label", to_string(a.label)}});
      }
      cj["annotations"] = std::move(anns);
      if (clause.gold) cj["gold"] = to_string(*clause.gold);
      if (clause.agreement) cj["agreement"] = *clause.agreement;
      clauses.push_back(std::move(cj));
    }
    record["clauses"] = std::move(clauses);
    out << record.dump() << "\n";
  }
}

std::size_t clause_count(const std::vector<Story>& corpus) {
  std::size_t n = 0;
  for (const Story& s : corpus) n += s.clauses.size();
  return n;
}

std::unordered_map<std::string, const Clause*> index_clauses(
    const std::vector<Story>& corpus) {
  std::unordered_map<std::string, const Clause*> index;
  for (const Story& s : corpus) {
    for (const Clause& c : s.clauses) index.emplace(c.clause_id, &c);
  }
  return index;
}

std::vector<const Clause*> collect_clauses(
    const std::vector<Story>& corpus, const std::vector<std::string>& ids) {
  auto index = index_clauses(corpus);
  std::vector<const Clause*> out;
  out.reserve(ids.size());
  for (const std::string& id : ids) {
    auto it = index.find(id);
    if (it == index.end()) throw DataError("unknown clause id: " + id);
    out.push_back(it->second);
  }
  return out;
}

GoldLabel aggregate_gold_label(const AnnotationSet& annotations,
                               std::uint64_t rng_seed) {
  if (annotations.empty()) {
    throw DataError("cannot aggregate an empty annotation set");
  }
  std::array<int, 4> counts{};
  for (const Annotation& a : annotations.labels) {
    counts[static_cast<std::size_t>(a.label)]++;
  }
  int best = *std::max_element(counts.begin(), counts.end());
  std::vector<ClauseType> modal;
  for (ClauseType t : kAllClauseTypes) {
    if (counts[static_cast<std::size_t>(t)] == best) modal.push_back(t);
  }
  ClauseType gold = modal.front();
  if (modal.size() > 1) {
    SplitMix64 rng(rng_seed);
    gold = modal[rng.uniform_index(modal.size())];
  }
  return GoldLabel{gold, counts[static_cast<std::size_t>(gold)]};
}

void aggregate_corpus(std::vector<Story>& corpus, std::uint64_t seed) {
  for (Story& story : corpus) {
    for (Clause& clause : story.clauses) {
      if (clause.annotations.empty()) {
        throw DataError("clause " + clause.clause_id + " has no annotations");
      }
      GoldLabel g = aggregate_gold_label(clause.annotations,
                                         derive_seed(clause.clause_id, seed));
      clause.gold = g.gold;
      clause.agreement = g.agreement;
    }
  }
}

namespace {

void require_aggregated(const Clause& clause) {
  if (!clause.gold || !clause.agreement) {
    throw DataError("clause " + clause.clause_id +
                    " lacks a gold label; run aggregation first");
  }
}

}  // namespace

std::map<ClauseType, LabelStats> label_distribution(
    const std::vector<Story>& corpus) {
  std::map<ClauseType, LabelStats> stats;
  for (ClauseType t : kAllClauseTypes) stats[t] = LabelStats{};
  std::size_t total = 0;
  std::map<ClauseType, std::size_t> agreement_sum;
  for (const Story& story : corpus) {
    for (const Clause& clause : story.clauses) {
      require_aggregated(clause);
      LabelStats& s = stats[*clause.gold];
      s.count++;
      agreement_sum[*clause.gold] += static_cast<std::size_t>(*clause.agreement);
      ++total;
    }
  }
  if (total == 0) throw DataError("empty corpus");
  for (auto& [type, s] : stats) {
    s.fraction = static_cast<double>(s.count) / static_cast<double>(total);
    s.mean_agreement =
        s.count == 0 ? 0.0
                     : static_cast<double>(agreement_sum[type]) /
                           static_cast<double>(s.count);
  }
  return stats;
}

AgreementCounts agreement_counts(const std::vector<Story>& corpus) {
  AgreementCounts counts;
  std::size_t total = 0;
  std::size_t sum = 0;
  for (const Story& story : corpus) {
    for (const Clause& clause : story.clauses) {
      require_aggregated(clause);
      int a = *clause.agreement;
      if (a >= 2) counts.at_least_two++;
      if (a == 3) counts.exactly_three++;
      sum += static_cast<std::size_t>(a);
      ++total;
    }
  }
  counts.mean_agreement =
      total == 0 ? 0.0 : static_cast<double>(sum) / static_cast<double>(total);
  return counts;
}

StatsReport corpus_stats(const std::vector<Story>& corpus, std::size_t top_k,
                         std::string_view query_word) {
  if (corpus.empty()) throw DataError("empty corpus");

  StatsReport report;
  report.story_count = corpus.size();
  report.query_word = case_fold(query_word);

  std::map<std::pair<std::string, std::string>, std::size_t> bigrams;
  std::size_t query_total = 0;
  for (const Story& story : corpus) {
    report.clause_count += story.clauses.size();
    for (const Clause& clause : story.clauses) {
      report.token_count += clause.tokens.size();
      std::string prev;
      bool have_prev = false;
      for (const Token& token : clause.tokens) {
        std::string folded = case_fold(token.text);
        if (folded == report.query_word) ++query_total;
        if (have_prev) {
          bigrams[{prev, folded}]++;
          ++report.bigram_total;
        }
        prev = std::move(folded);
        have_prev = true;
      }
    }
  }
  report.mean_clauses_per_story =
      static_cast<double>(report.clause_count) /
      static_cast<double>(report.story_count);
  report.mean_tokens_per_clause =
      report.clause_count == 0
          ? 0.0
          : static_cast<double>(report.token_count) /
                static_cast<double>(report.clause_count);
  report.query_word_mean_per_story =
      static_cast<double>(query_total) / static_cast<double>(report.story_count);

  std::vector<BigramStat> all;
  all.reserve(bigrams.size());
  for (const auto& [key, count] : bigrams) {
    BigramStat b;
    b.first = key.first;
    b.second = key.second;
    b.count = count;
    b.fraction = report.bigram_total == 0
                     ? 0.0
                     : static_cast<double>(count) /
                           static_cast<double>(report.bigram_total);
    all.push_back(std::move(b));
  }
  std::sort(all.begin(), all.end(), [](const BigramStat& a, const BigramStat& b) {
    if (a.count != b.count) return a.count > b.count;
    if (a.first != b.first) return a.first < b.first;
    return a.second < b.second;
  });
  if (all.size() > top_k) all.resize(top_k);
  report.top_bigrams = std::move(all);
  return report;
}

DatasetSplit split_dataset(const std::vector<Story>& corpus,
                           const SplitOptions& options) {
  const double sum = options.fractions[0] + options.fractions[1] +
                     options.fractions[2];
  if (std::abs(sum - 1.0) > 1e-9) {
    throw DataError("split fractions must sum to 1, got " +
                    std::to_string(sum));
  }
  if (corpus.empty()) throw DataError("empty corpus");

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  SplitMix64 rng(options.seed);
  rng.shuffle(order);

  const std::size_t n = corpus.size();
  std::size_t n_train = static_cast<std::size_t>(
      std::llround(options.fractions[0] * static_cast<double>(n)));
  std::size_t n_val = static_cast<std::size_t>(
      std::llround(options.fractions[1] * static_cast<double>(n)));
  n_train = std::min(n_train, n);
  n_val = std::min(n_val, n - n_train);

  DatasetSplit split;
  split.seed = options.seed;
  auto keep = [&](const Clause& clause) {
    require_aggregated(clause);
    if (*clause.agreement < options.min_agreement) return false;
    if (options.drop_not_story && *clause.gold == ClauseType::NotStory) {
      return false;
    }
    return true;
  };
  for (std::size_t rank = 0; rank < n; ++rank) {
    const Story& story = corpus[order[rank]];
    std::vector<std::string>* target =
        rank < n_train ? &split.train
                       : (rank < n_train + n_val ? &split.validation
                                                 : &split.test);
    for (const Clause& clause : story.clauses) {
      if (keep(clause)) target->push_back(clause.clause_id);
    }
  }
  if (split.train.empty() || split.validation.empty() || split.test.empty()) {
    throw DataError("a split partition is empty after filtering");
  }
  return split;
}

}  // namespace narrative
