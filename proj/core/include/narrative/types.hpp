#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace narrative {

/// Malformed or inconsistent input data (files, records, schemas).
/// The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ClauseType { Action, Orientation, Evaluation, NotStory };

inline constexpr std::array<ClauseType, 4> kAllClauseTypes = {
    ClauseType::Action, ClauseType::Orientation, ClauseType::Evaluation,
    ClauseType::NotStory};

// The three narrative aspects (NotStory excluded); also the classifier
// label-order contract: class index 0 = action, 1 = evaluation, 2 = orientation.
inline constexpr std::array<ClauseType, 3> kClassifierLabelOrder = {
    ClauseType::Action, ClauseType::Evaluation, ClauseType::Orientation};

std::string to_string(ClauseType type);
ClauseType clause_type_from_string(const std::string& name);

/// Class index under the label-order contract; -1 for NotStory.
int class_index(ClauseType type);
ClauseType class_label(int index);

struct Token {
  std::string text;
  std::optional<std::string> pos;  // Penn Treebank tag; absent before tagging
};

struct Annotation {
  std::string annotator_id;
  ClauseType label;
};

struct AnnotationSet {
  std::vector<Annotation> labels;

  bool empty() const { return labels.empty(); }
  std::size_t size() const { return labels.size(); }
};

struct Clause {
  std::string clause_id;  // derived as "<story_id>#<index>" at load time
  std::string story_id;
  int index = 0;
  std::string text;  // raw clause text as ingested
  std::vector<Token> tokens;
  AnnotationSet annotations;
  std::optional<ClauseType> gold;  // present iff aggregation has run
  std::optional<int> agreement;    // annotators matching the gold label
};

struct Story {
  std::string story_id;
  std::vector<Clause> clauses;
  std::optional<std::string> speaker_gender;
  std::optional<std::string> transcript;
  std::optional<double> duration_seconds;
};

struct DatasetSplit {
  std::vector<std::string> train;       // clause ids
  std::vector<std::string> validation;  // clause ids
  std::vector<std::string> test;        // clause ids
  std::uint64_t seed = 0;
};

}  // namespace narrative
