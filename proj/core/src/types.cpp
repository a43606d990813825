#include "narrative/types.hpp"

namespace narrative {

std::string to_string(ClauseType type) {
  switch (type) {
    case ClauseType::Action:
      return "action";
    case ClauseType::Orientation:
      return "orientation";
    case ClauseType::Evaluation:
      return "evaluation";
    case ClauseType::NotStory:
      return "not_story";
  }
  throw std::invalid_argument("unknown ClauseType value");
}

ClauseType clause_type_from_string(const std::string& name) {
  if (name == "action") return ClauseType::Action;
  if (name == "orientation") return ClauseType::Orientation;
  if (name == "evaluation") return ClauseType::Evaluation;
  if (name == "not_story") return ClauseType::NotStory;
  throw DataError("unknown clause type \"" + name + "\"");
}

int class_index(ClauseType type) {
  for (std::size_t i = 0; i < kClassifierLabelOrder.size(); ++i) {
    if (kClassifierLabelOrder[i] == type) return static_cast<int>(i);
  }
  return -1;
}

ClauseType class_label(int index) {
  if (index < 0 || index >= static_cast<int>(kClassifierLabelOrder.size())) {
    throw std::invalid_argument("class index out of range: " +
                                std::to_string(index));
  }
  return kClassifierLabelOrder[static_cast<std::size_t>(index)];
}

}  // namespace narrative
