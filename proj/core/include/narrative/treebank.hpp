#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "narrative/types.hpp"

namespace narrative {

/// One node of a Penn-Treebank-II bracketed constituency tree. Leaves carry
/// the token in leaf_text and the preterminal tag in label (empty label for a
/// bare, untagged token). Exactly one of {children non-empty, leaf} holds.
struct ParseNode {
  std::string label;
  std::vector<ParseNode> children;
  std::string leaf_text;

  bool is_leaf() const { return children.empty(); }
};

bool trees_equal(const ParseNode& a, const ParseNode& b);

/// Parses one bracketed expression. Multiple top-level expressions, or a
/// label-less outer layer as in "((S ...))", are wrapped in a synthetic ROOT.
/// Throws DataError with a character offset on unbalanced brackets, and on
/// empty input or label-less nested nodes.
ParseNode parse_bracketed(std::string_view text);

/// Inverse of parse_bracketed up to whitespace normalization.
std::string serialize_tree(const ParseNode& tree);

/// In-order (token, tag) leaves of a tree.
std::vector<Token> tree_leaves(const ParseNode& tree);

struct ClauseSpan {
  std::vector<Token> tokens;  // text plus preterminal POS tag
  int source_sentence = 0;
  std::vector<std::string> covered_node_labels;
};

/// Splits one sentence tree into narrative clauses. Direct children of the
/// sentence root labeled S, SINV, SBARQ, or SQ each start a clause; all other
/// children (SBAR, PP, CC, ADVP, punctuation, ...) are hanging material that
/// attaches forward to the next clause, or backward when trailing. Without
/// any clause-initiating child the whole sentence is a single span. Token
/// coverage is total.
std::vector<ClauseSpan> segment_sentence(const ParseNode& tree);

/// Per-sentence segmentation concatenated in story order; source_sentence is
/// the index into `trees`.
std::vector<ClauseSpan> segment_story(const std::vector<ParseNode>& trees);

struct TreeStory {
  std::string story_id;
  std::vector<ParseNode> trees;
};

/// Reads trees from a file. Two formats, auto-detected per file: plain lines
/// (one bracketed tree per line, blank line separates stories) or JSON lines
/// {"story_id": str, "trees": [str, ...]}.
std::vector<TreeStory> load_tree_file(const std::filesystem::path& path);

}  // namespace narrative
