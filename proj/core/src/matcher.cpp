#include "narrative/matcher.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "narrative/corpus.hpp"
#include "narrative/rng.hpp"

namespace narrative {

using json = nlohmann::json;

WordAveragingEncoder::WordAveragingEncoder(
    std::map<std::string, Eigen::VectorXf> vectors, int dim, std::string name)
    : vectors_(std::move(vectors)), dim_(dim), name_(std::move(name)) {
  for (const auto& [token, v] : vectors_) {
    if (v.size() != dim_) {
      throw DataError("encoder vector for \"" + token + "\" has dimension " +
                      std::to_string(v.size()));
    }
  }
}

WordAveragingEncoder WordAveragingEncoder::from_file(
    const std::filesystem::path& path, int dim) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file: " + path.string());
  std::map<std::string, Eigen::VectorXf> vectors;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string token;
    fields >> token;
    Eigen::VectorXf v(dim);
    int col = 0;
    double value;
    while (fields >> value && col < dim) v(col++) = static_cast<float>(value);
    if (col != dim || (fields >> value)) {
      throw DataError("embedding file line " + std::to_string(line_no) +
                      ": expected " + std::to_string(dim) + " values");
    }
    vectors[case_fold(token)] = std::move(v);
  }
  return WordAveragingEncoder(std::move(vectors), dim,
                              "word-average:" + path.filename().string());
}

Eigen::VectorXf WordAveragingEncoder::encode(const std::string& text) const {
  Eigen::VectorXf sum = Eigen::VectorXf::Zero(dim_);
  std::size_t hits = 0;
  for (const std::string& token : tokenize(text)) {
    auto it = vectors_.find(case_fold(token));
    if (it == vectors_.end()) continue;
    sum += it->second;
    ++hits;
  }
  if (hits == 0) return sum;  // zero vector; cosine convention handles it
  sum /= static_cast<float>(hits);
  const float norm = sum.norm();
  if (norm > 0.0f) sum /= norm;
  return sum;
}

PrecomputedEncoder::PrecomputedEncoder(
    std::map<std::string, Eigen::VectorXf> vectors, int dim, std::string name)
    : vectors_(std::move(vectors)), dim_(dim), name_(std::move(name)) {}

PrecomputedEncoder PrecomputedEncoder::from_file(
    const std::filesystem::path& path, std::string name) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open encoder file: " + path.string());
  std::map<std::string, Eigen::VectorXf> vectors;
  int dim = -1;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
      const std::string text = record.at("text").get<std::string>();
      const auto values = record.at("vector").get<std::vector<double>>();
      if (dim < 0) dim = static_cast<int>(values.size());
      if (static_cast<int>(values.size()) != dim || dim == 0) {
        throw DataError("inconsistent vector dimension");
      }
      Eigen::VectorXf v(dim);
      for (int i = 0; i < dim; ++i) v(i) = static_cast<float>(values[static_cast<std::size_t>(i)]);
      vectors[text] = std::move(v);
    } catch (const json::exception& e) {
      throw DataError("encoder file line " + std::to_string(line_no) + ": " +
                      e.what());
    }
  }
  if (dim < 0) throw DataError("encoder file is empty: " + path.string());
  return PrecomputedEncoder(std::move(vectors), dim, std::move(name));
}

Eigen::VectorXf PrecomputedEncoder::encode(const std::string& text) const {
  auto it = vectors_.find(text);
  if (it == vectors_.end()) {
    throw DataError("precomputed encoder has no vector for text: \"" + text +
                    "\"");
  }
  return it->second;
}

double cosine(const Eigen::VectorXf& u, const Eigen::VectorXf& v) {
  if (u.size() != v.size()) {
    throw std::invalid_argument("cosine: dimension mismatch (" +
                                std::to_string(u.size()) + " vs " +
                                std::to_string(v.size()) + ")");
  }
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double a = static_cast<double>(u(i));
    const double b = static_cast<double>(v(i));
    dot += a * b;
    nu += a * a;
    nv += b * b;
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

namespace {

std::vector<ClauseAlignment> best_matches(
    const std::vector<Eigen::VectorXf>& from,
    const std::vector<Eigen::VectorXf>& to) {
  std::vector<ClauseAlignment> alignments;
  alignments.reserve(from.size());
  for (std::size_t i = 0; i < from.size(); ++i) {
    int best = 0;
    double best_cos = cosine(from[i], to[0]);
    for (std::size_t j = 1; j < to.size(); ++j) {
      const double c = cosine(from[i], to[j]);
      if (c > best_cos) {
        best_cos = c;
        best = static_cast<int>(j);
      }
    }
    alignments.push_back(ClauseAlignment{static_cast<int>(i), best, best_cos});
  }
  return alignments;
}

double mean_alignment(const std::vector<ClauseAlignment>& alignments) {
  double sum = 0.0;
  for (const ClauseAlignment& a : alignments) sum += a.cosine;
  return sum / static_cast<double>(alignments.size());
}

bool aspect_keeps(const Clause& clause, std::optional<ClauseType> aspect) {
  if (!clause.gold) {
    throw DataError("clause " + clause.clause_id +
                    " has no label; aggregate or predict before matching");
  }
  if (*clause.gold == ClauseType::NotStory) return false;
  return !aspect || *clause.gold == *aspect;
}

std::vector<Eigen::VectorXf> encode_story_clauses(
    const Story& story, std::optional<ClauseType> aspect,
    const SentenceEncoder& encoder) {
  std::vector<Eigen::VectorXf> vectors;
  for (const Clause& clause : story.clauses) {
    if (!aspect_keeps(clause, aspect)) continue;
    std::string text = clause.text;
    if (text.empty()) {
      for (const Token& t : clause.tokens) {
        if (!text.empty()) text += ' ';
        text += t.text;
      }
    }
    vectors.push_back(encoder.encode(text));
  }
  return vectors;
}

}  // namespace

double directed_score(const std::vector<Eigen::VectorXf>& s,
                      const std::vector<Eigen::VectorXf>& s_prime) {
  if (s.empty() || s_prime.empty()) {
    throw DataError("directed_score requires non-empty clause lists");
  }
  return mean_alignment(best_matches(s, s_prime));
}

PairScore pair_score(const Story& story_a, const Story& story_b,
                     std::optional<ClauseType> aspect,
                     const SentenceEncoder& encoder) {
  if (aspect && *aspect == ClauseType::NotStory) {
    throw std::invalid_argument("not_story is not a matchable aspect");
  }
  const std::string aspect_name = aspect ? to_string(*aspect) : "all";

  // canonical evaluation order makes pair_score(a,b) == pair_score(b,a) exactly
  const bool swapped = story_b.story_id < story_a.story_id;
  const Story& first = swapped ? story_b : story_a;
  const Story& second = swapped ? story_a : story_b;

  std::vector<Eigen::VectorXf> first_vecs =
      encode_story_clauses(first, aspect, encoder);
  std::vector<Eigen::VectorXf> second_vecs =
      encode_story_clauses(second, aspect, encoder);
  if (first_vecs.empty()) {
    throw DataError("pair score undefined: story " + first.story_id +
                    " has no clause of aspect " + aspect_name);
  }
  if (second_vecs.empty()) {
    throw DataError("pair score undefined: story " + second.story_id +
                    " has no clause of aspect " + aspect_name);
  }

  std::vector<ClauseAlignment> forward = best_matches(first_vecs, second_vecs);
  std::vector<ClauseAlignment> backward = best_matches(second_vecs, first_vecs);

  PairScore result;
  result.story_a = story_a.story_id;
  result.story_b = story_b.story_id;
  result.aspect = aspect;
  result.score = (mean_alignment(forward) + mean_alignment(backward)) / 2.0;
  result.a_to_b = swapped ? backward : forward;
  result.b_to_a = swapped ? forward : backward;
  result.label_source = "gold";
  return result;
}

namespace {

std::optional<double> try_pair_score(const Story& a, const Story& b,
                                     std::optional<ClauseType> aspect,
                                     const SentenceEncoder& encoder) {
  bool a_has = false, b_has = false;
  for (const Clause& c : a.clauses) {
    if (aspect_keeps(c, aspect)) {
      a_has = true;
      break;
    }
  }
  for (const Clause& c : b.clauses) {
    if (aspect_keeps(c, aspect)) {
      b_has = true;
      break;
    }
  }
  if (!a_has || !b_has) return std::nullopt;
  return pair_score(a, b, aspect, encoder).score;
}

std::array<ClauseType, 2> other_aspects(ClauseType aspect) {
  std::array<ClauseType, 2> others{};
  std::size_t at = 0;
  for (ClauseType t : kClassifierLabelOrder) {
    if (t != aspect) others[at++] = t;
  }
  return others;
}

}  // namespace

std::vector<MatchedPair> select_exclusive_pairs(const std::vector<Story>& corpus,
                                                ClauseType aspect,
                                                const SentenceEncoder& encoder,
                                                const SelectOptions& options) {
  if (aspect == ClauseType::NotStory) {
    throw std::invalid_argument("not_story is not a matchable aspect");
  }
  const auto others = other_aspects(aspect);

  std::vector<std::pair<std::size_t, std::size_t>> candidates;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (std::size_t j = i + 1; j < corpus.size(); ++j) {
      candidates.emplace_back(i, j);
    }
  }

  // scored independently per pair, then collected in enumeration order, so
  // the result is identical for any thread count
  std::vector<std::optional<MatchedPair>> scored(candidates.size());
  auto score_pair = [&](std::size_t c) {
    const Story& a = corpus[candidates[c].first];
    const Story& b = corpus[candidates[c].second];
    auto target = try_pair_score(a, b, aspect, encoder);
    if (!target || *target < options.threshold) return;
    for (ClauseType other : others) {
      auto off = try_pair_score(a, b, other, encoder);
      if (off && *off >= options.threshold) return;
    }
    scored[c] = MatchedPair{a.story_id, b.story_id, *target};
  };

  const int jobs = std::max(1, options.jobs);
  if (jobs == 1 || candidates.size() < 2) {
    for (std::size_t c = 0; c < candidates.size(); ++c) score_pair(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto worker = [&] {
      try {
        for (std::size_t c = next.fetch_add(1); c < candidates.size();
             c = next.fetch_add(1)) {
          score_pair(c);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  std::vector<MatchedPair> eligible;
  for (std::optional<MatchedPair>& pair : scored) {
    if (pair) eligible.push_back(std::move(*pair));
  }
  if (eligible.empty()) {
    if (options.allow_empty) return {};
    throw DataError("no story pair is exclusively matched at " +
                    to_string(aspect) + " with threshold >= " +
                    std::to_string(options.threshold));
  }
  if (eligible.size() > options.max_pairs) {
    SplitMix64 rng(options.seed);
    rng.shuffle(eligible);
    eligible.resize(options.max_pairs);
  }
  return eligible;
}

std::string select_distractor_story(const std::vector<Story>& corpus,
                                    const std::string& anchor_id,
                                    ClauseType aspect,
                                    const SentenceEncoder& encoder,
                                    double threshold) {
  if (aspect == ClauseType::NotStory) {
    throw std::invalid_argument("not_story is not a matchable aspect");
  }
  const Story* anchor = nullptr;
  for (const Story& s : corpus) {
    if (s.story_id == anchor_id) {
      anchor = &s;
      break;
    }
  }
  if (anchor == nullptr) throw DataError("unknown anchor story: " + anchor_id);

  const auto others = other_aspects(aspect);
  bool found = false;
  double best_off = 0.0;
  std::string best_id;
  for (const Story& candidate : corpus) {
    if (candidate.story_id == anchor_id) continue;
    auto target = try_pair_score(*anchor, candidate, aspect, encoder);
    if (!target || *target < threshold) continue;
    double off = -1.0;  // absent off-aspects count lowest
    for (ClauseType other : others) {
      auto score = try_pair_score(*anchor, candidate, other, encoder);
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
    throw DataError("no candidate story clears threshold " +
                    std::to_string(threshold) + " at " + to_string(aspect) +
                    " for anchor " + anchor_id);
  }
  return best_id;
}

std::vector<ChoiceRecord> load_choice_records(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open records file: " + path.string());
  std::vector<ChoiceRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json j = json::parse(line);
      ChoiceRecord r;
      r.main_story = j.at("main").get<std::string>();
      r.matched_story = j.at("matched").get<std::string>();
      r.random_story = j.at("random").get<std::string>();
      r.matched_aspect = clause_type_from_string(j.at("aspect").get<std::string>());
      if (r.matched_aspect == ClauseType::NotStory) {
        throw DataError("not_story is not a matchable aspect");
      }
      r.presentation_order = j.at("order").get<std::string>();
      if (r.presentation_order != "AB" && r.presentation_order != "BA") {
        throw DataError("order must be AB or BA");
      }
      r.chosen = j.at("chosen").get<std::string>();
      if (r.chosen != r.matched_story && r.chosen != r.random_story) {
        throw DataError("chosen story is neither the matched nor the random one");
      }
      if (auto it = j.find("reason"); it != j.end() && !it->is_null()) {
        r.free_text_reason = it->get<std::string>();
      }
      if (auto it = j.find("mapped_aspects"); it != j.end() && !it->is_null()) {
        std::set<ClauseType> aspects;
        for (const auto& a : *it) {
          ClauseType t = clause_type_from_string(a.get<std::string>());
          if (t == ClauseType::NotStory) {
            throw DataError("mapped aspects must be story clause types");
          }
          aspects.insert(t);
        }
        r.mapped_aspects = std::move(aspects);
      }
      records.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw DataError("records line " + std::to_string(line_no) + ": " +
                      e.what());
    } catch (const DataError& e) {
      throw DataError("records line " + std::to_string(line_no) + ": " +
                      e.what());
    }
  }
  return records;
}

std::vector<DetectionRow> detection_report(
    const std::vector<ChoiceRecord>& records) {
  if (records.empty()) throw DataError("no choice records to report");
  std::vector<DetectionRow> rows;
  for (ClauseType aspect : kClassifierLabelOrder) {
    DetectionRow row;
    row.aspect = aspect;
    for (const ChoiceRecord& r : records) {
      if (r.matched_aspect != aspect) continue;
      row.records++;
      if (r.chosen == r.matched_story) row.detected++;
    }
    row.percent = row.records == 0
                      ? 0.0
                      : 100.0 * static_cast<double>(row.detected) /
                            static_cast<double>(row.records);
    rows.push_back(row);
  }
  return rows;
}

AspectMentionMatrix aspect_mention_report(
    const std::vector<ChoiceRecord>& records) {
  if (records.empty()) throw DataError("no choice records to report");

  // pair key -> union of mentioned aspects, grouped by matched aspect
  std::array<std::map<std::pair<std::string, std::string>, std::set<ClauseType>>,
             3>
      rows;
  for (const ChoiceRecord& r : records) {
    if (!r.mapped_aspects) {
      throw DataError("record for main story " + r.main_story +
                      " lacks mapped_aspects");
    }
    const int row = class_index(r.matched_aspect);
    auto& mentions =
        rows[static_cast<std::size_t>(row)][{r.main_story, r.matched_story}];
    mentions.insert(r.mapped_aspects->begin(), r.mapped_aspects->end());
  }

  AspectMentionMatrix matrix;
  for (std::size_t row = 0; row < 3; ++row) {
    matrix.row_pairs[row] = rows[row].size();
    if (rows[row].empty()) continue;
    for (std::size_t col = 0; col < 3; ++col) {
      const ClauseType mentioned = kClassifierLabelOrder[col];
      std::size_t hits = 0;
      for (const auto& [pair, mentions] : rows[row]) {
        if (mentions.count(mentioned) > 0) ++hits;
      }
      matrix.percent[row][col] = 100.0 * static_cast<double>(hits) /
                                 static_cast<double>(rows[row].size());
    }
  }
  return matrix;
}

namespace {

std::string pct(double value) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(1) << value << "%";
  return out.str();
}

}  // namespace

std::string format_detection_table(const std::vector<DetectionRow>& rows) {
  std::ostringstream out;
  out << std::left << std::setw(16) << "Match only at"
      << "% of times detected\n";
  for (const DetectionRow& row : rows) {
    out << std::left << std::setw(16) << to_string(row.aspect) << pct(row.percent)
        << "  (" << row.detected << "/" << row.records << ")\n";
  }
  return out.str();
}

std::string format_detection_csv(const std::vector<DetectionRow>& rows) {
  std::ostringstream out;
  out << "aspect,records,detected,percent\n";
  for (const DetectionRow& row : rows) {
    out << to_string(row.aspect) << "," << row.records << "," << row.detected
        << "," << std::fixed << std::setprecision(1) << row.percent << "\n";
  }
  return out.str();
}

std::string format_mention_table(const AspectMentionMatrix& matrix) {
  std::ostringstream out;
  out << std::left << std::setw(14) << "Match at";
  for (ClauseType t : kClassifierLabelOrder) {
    out << std::left << std::setw(13) << to_string(t);
  }
  out << "\n";
  for (std::size_t row = 0; row < 3; ++row) {
    out << std::left << std::setw(14) << to_string(kClassifierLabelOrder[row]);
    for (std::size_t col = 0; col < 3; ++col) {
      out << std::left << std::setw(13) << pct(matrix.percent[row][col]);
    }
    out << "\n";
  }
  return out.str();
}

std::string format_mention_csv(const AspectMentionMatrix& matrix) {
  std::ostringstream out;
  out << "match_at,action,evaluation,orientation\n";
  for (std::size_t row = 0; row < 3; ++row) {
    out << to_string(kClassifierLabelOrder[row]);
    for (std::size_t col = 0; col < 3; ++col) {
      out << "," << std::fixed << std::setprecision(1)
          << matrix.percent[row][col];
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace narrative
