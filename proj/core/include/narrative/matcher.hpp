#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "narrative/types.hpp"

namespace narrative {

/// Deterministic text -> fixed-dimension vector. Implementations must be
/// read-only after construction.
class SentenceEncoder {
 public:
  virtual ~SentenceEncoder() = default;
  virtual Eigen::VectorXf encode(const std::string& text) const = 0;
  virtual int dim() const = 0;
  virtual std::string name() const = 0;
};

/// Fallback encoder: L2-normalized mean of pretrained word vectors. Tokens
/// absent from the table contribute nothing; a clause with no known token
/// encodes to the zero vector.
class WordAveragingEncoder : public SentenceEncoder {
 public:
  WordAveragingEncoder(std::map<std::string, Eigen::VectorXf> vectors, int dim,
                       std::string name = "word-average");

  /// Reads a "token v1 ... vdim" text file (same format the classifier's
  /// embedding loader consumes).
  static WordAveragingEncoder from_file(const std::filesystem::path& path,
                                        int dim = 300);

  Eigen::VectorXf encode(const std::string& text) const override;
  int dim() const override { return dim_; }
  std::string name() const override { return name_; }

 private:
  std::map<std::string, Eigen::VectorXf> vectors_;
  int dim_;
  std::string name_;
};

/// Serialized-artifact encoder: exact clause texts mapped to externally
/// computed vectors (e.g. exported from a large pretrained sentence encoder).
/// Unknown texts are an error.
class PrecomputedEncoder : public SentenceEncoder {
 public:
  /// JSON lines: {"text": str, "vector": [num, ...]}.
  static PrecomputedEncoder from_file(const std::filesystem::path& path,
                                      std::string name = "precomputed");

  PrecomputedEncoder(std::map<std::string, Eigen::VectorXf> vectors, int dim,
                     std::string name);

  Eigen::VectorXf encode(const std::string& text) const override;
  int dim() const override { return dim_; }
  std::string name() const override { return name_; }

 private:
  std::map<std::string, Eigen::VectorXf> vectors_;
  int dim_;
  std::string name_;
};

/// u.v / (|u||v|), accumulated in double; 0 when either norm is 0.
double cosine(const Eigen::VectorXf& u, const Eigen::VectorXf& v);

/// Mean over clauses of s of the best cosine match in s_prime.
double directed_score(const std::vector<Eigen::VectorXf>& s,
                      const std::vector<Eigen::VectorXf>& s_prime);

struct ClauseAlignment {
  int from_index;  // clause position among the aspect-filtered clauses
  int to_index;
  double cosine;
};

struct PairScore {
  std::string story_a;
  std::string story_b;
  std::optional<ClauseType> aspect;  // nullopt = ALL (three story types)
  double score = 0.0;
  std::vector<ClauseAlignment> a_to_b;
  std::vector<ClauseAlignment> b_to_a;
  std::string label_source;  // "gold" or "predicted"
};

/// Symmetric aspect-restricted similarity. NotStory clauses are always
/// excluded; requesting an aspect absent from either story is an error, not a
/// zero. Exactly symmetric in its arguments (canonical evaluation order).
PairScore pair_score(const Story& story_a, const Story& story_b,
                     std::optional<ClauseType> aspect,
                     const SentenceEncoder& encoder);

struct MatchedPair {
  std::string story;
  std::string matched_story;
  double score = 0.0;
};

struct SelectOptions {
  double threshold = 0.5;
  std::size_t max_pairs = 60;
  std::uint64_t seed = 0;
  bool allow_empty = false;  // return {} instead of throwing
  int jobs = 1;              // worker threads for pair scoring
};

/// Pairs scoring >= threshold at `aspect` and < threshold at both other
/// aspects (absent off-aspects count as below threshold). When more pairs are
/// eligible than requested, a seeded uniform sample is drawn. Scoring is
/// spread over `jobs` threads; results do not depend on the thread count.
std::vector<MatchedPair> select_exclusive_pairs(const std::vector<Story>& corpus,
                                                ClauseType aspect,
                                                const SentenceEncoder& encoder,
                                                const SelectOptions& options);

/// Among stories scoring >= threshold against the anchor at `aspect`, the one
/// minimizing the larger of the two off-aspect scores (absent off-aspects
/// count as -1); ties break toward the lowest story_id.
std::string select_distractor_story(const std::vector<Story>& corpus,
                                    const std::string& anchor_id,
                                    ClauseType aspect,
                                    const SentenceEncoder& encoder,
                                    double threshold = 0.5);

// --- forced-choice experiment records ----------------------------------------

struct ChoiceRecord {
  std::string main_story;
  std::string matched_story;
  std::string random_story;
  ClauseType matched_aspect;
  std::string presentation_order;  // "AB" or "BA"
  std::string chosen;              // matched_story or random_story
  std::optional<std::string> free_text_reason;
  std::optional<std::set<ClauseType>> mapped_aspects;
};

std::vector<ChoiceRecord> load_choice_records(
    const std::filesystem::path& path);

struct DetectionRow {
  ClauseType aspect;
  std::size_t records = 0;
  std::size_t detected = 0;  // chose the matched story
  double percent = 0.0;
};

/// Per-aspect share of records whose chooser picked the matched story.
std::vector<DetectionRow> detection_report(
    const std::vector<ChoiceRecord>& records);

struct AspectMentionMatrix {
  // row = matched aspect, column = mentioned aspect, both in label order
  // (action, evaluation, orientation); cell = % of that row's story pairs
  // with at least one explanation mapped to the column aspect
  std::array<std::array<double, 3>, 3> percent{};
  std::array<std::size_t, 3> row_pairs{};
};

AspectMentionMatrix aspect_mention_report(
    const std::vector<ChoiceRecord>& records);

// table/CSV rendering, mirroring the experiment summary layouts
std::string format_detection_table(const std::vector<DetectionRow>& rows);
std::string format_detection_csv(const std::vector<DetectionRow>& rows);
std::string format_mention_table(const AspectMentionMatrix& matrix);
std::string format_mention_csv(const AspectMentionMatrix& matrix);

}  // namespace narrative
