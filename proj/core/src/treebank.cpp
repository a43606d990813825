#include "narrative/treebank.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace narrative {

namespace {

struct Lexer {
  std::string_view text;
  std::size_t pos = 0;

  void skip_space() {
    while (pos < text.size() &&
           std::isspace(static_cast<unsigned char>(text[pos]))) {
      ++pos;
    }
  }

  bool done() {
    skip_space();
    return pos >= text.size();
  }

  char peek() {
    skip_space();
    return text[pos];
  }

  std::string atom() {
    skip_space();
    std::size_t start = pos;
    while (pos < text.size() && text[pos] != '(' && text[pos] != ')' &&
           !std::isspace(static_cast<unsigned char>(text[pos]))) {
      ++pos;
    }
    return std::string(text.substr(start, pos - start));
  }
};

[[noreturn]] void parse_fail(const Lexer& lex, const std::string& what) {
  throw DataError("bracketed parse error at offset " +
                  std::to_string(lex.pos) + ": " + what);
}

// node := '(' label? child* ')' | atom
// A labeled node with a single bare-token child collapses into a tagged leaf,
// so "(VBD went)" becomes one leaf {label VBD, text went}.
ParseNode parse_node(Lexer& lex, bool at_top) {
  if (lex.peek() != '(') {
    ParseNode leaf;
    leaf.leaf_text = lex.atom();
    return leaf;
  }
  ++lex.pos;  // consume '('

  ParseNode node;
  if (lex.done()) parse_fail(lex, "unbalanced '(' at end of input");
  if (lex.peek() != '(' && lex.peek() != ')') {
    node.label = lex.atom();
  }

  while (true) {
    if (lex.done()) parse_fail(lex, "unbalanced '(' at end of input");
    if (lex.peek() == ')') {
      ++lex.pos;
      break;
    }
    node.children.push_back(parse_node(lex, false));
  }

  if (node.label.empty()) {
    if (node.children.empty()) parse_fail(lex, "label-less empty node \"()\"");
    if (!at_top) parse_fail(lex, "label-less nested node");
    node.label = "ROOT";
    return node;
  }
  if (node.children.empty()) {
    parse_fail(lex, "constituent \"" + node.label + "\" has no children");
  }
  if (node.children.size() == 1 && node.children.front().is_leaf() &&
      node.children.front().label.empty()) {
    ParseNode leaf;
    leaf.label = std::move(node.label);
    leaf.leaf_text = std::move(node.children.front().leaf_text);
    return leaf;
  }
  return node;
}

/// Label with PTB function tags / coindexing stripped: "S-TPC-1" -> "S".
/// Labels that begin with '-' (-LRB-, -RRB-, --) are kept whole.
std::string_view base_label(std::string_view label) {
  if (label.empty() || label.front() == '-') return label;
  std::size_t cut = label.find_first_of("-=");
  return cut == std::string_view::npos ? label : label.substr(0, cut);
}

bool is_clause_initiating(const ParseNode& node) {
  std::string_view base = base_label(node.label);
  return base == "S" || base == "SINV" || base == "SBARQ" || base == "SQ";
}

void collect_leaves(const ParseNode& node, std::vector<Token>& out) {
  if (node.is_leaf()) {
    Token t;
    t.text = node.leaf_text;
    if (!node.label.empty()) t.pos = node.label;
    out.push_back(std::move(t));
    return;
  }
  for (const ParseNode& child : node.children) collect_leaves(child, out);
}

const ParseNode& unwrap_root(const ParseNode& tree) {
  const ParseNode* node = &tree;
  while (!node->is_leaf() && node->children.size() == 1 &&
         (node->label == "ROOT" || node->label == "TOP")) {
    node = &node->children.front();
  }
  return *node;
}

}  // namespace

bool trees_equal(const ParseNode& a, const ParseNode& b) {
  if (a.label != b.label || a.leaf_text != b.leaf_text ||
      a.children.size() != b.children.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    if (!trees_equal(a.children[i], b.children[i])) return false;
  }
  return true;
}

ParseNode parse_bracketed(std::string_view text) {
  Lexer lex{text};
  if (lex.done()) throw DataError("empty bracketed input");

  std::vector<ParseNode> tops;
  while (!lex.done()) {
    if (lex.peek() == ')') parse_fail(lex, "unbalanced ')'");
    tops.push_back(parse_node(lex, true));
  }
  if (tops.size() == 1) return std::move(tops.front());
  ParseNode root;
  root.label = "ROOT";
  root.children = std::move(tops);
  return root;
}

std::string serialize_tree(const ParseNode& tree) {
  std::ostringstream out;
  struct Writer {
    std::ostringstream& out;
    void write(const ParseNode& node) {
      if (node.is_leaf()) {
        if (node.label.empty()) {
          out << node.leaf_text;
        } else {
          out << '(' << node.label << ' ' << node.leaf_text << ')';
        }
        return;
      }
      out << '(' << node.label;
      for (const ParseNode& child : node.children) {
        out << ' ';
        write(child);
      }
      out << ')';
    }
  } writer{out};
  writer.write(tree);
  return out.str();
}

std::vector<Token> tree_leaves(const ParseNode& tree) {
  std::vector<Token> leaves;
  collect_leaves(tree, leaves);
  return leaves;
}

std::vector<ClauseSpan> segment_sentence(const ParseNode& tree) {
  if (tree.label.empty() && tree.leaf_text.empty() && tree.children.empty()) {
    throw DataError("cannot segment an empty tree");
  }
  const ParseNode& root = unwrap_root(tree);

  std::vector<ClauseSpan> spans;
  if (root.is_leaf()) {
    ClauseSpan span;
    collect_leaves(root, span.tokens);
    span.covered_node_labels.push_back(root.label);
    spans.push_back(std::move(span));
    return spans;
  }

  bool any_clause = false;
  for (const ParseNode& child : root.children) {
    if (is_clause_initiating(child)) {
      any_clause = true;
      break;
    }
  }
  if (!any_clause) {
    ClauseSpan span;
    collect_leaves(root, span.tokens);
    span.covered_node_labels.push_back(root.label);
    spans.push_back(std::move(span));
    return spans;
  }

  // Hanging (non-clausal) children buffer forward onto the next clause;
  // whatever trails the final clause attaches backward to it.
  ClauseSpan pending;
  for (const ParseNode& child : root.children) {
    if (is_clause_initiating(child)) {
      ClauseSpan span = std::move(pending);
      pending = ClauseSpan{};
      collect_leaves(child, span.tokens);
      span.covered_node_labels.push_back(child.label);
      spans.push_back(std::move(span));
    } else {
      collect_leaves(child, pending.tokens);
      pending.covered_node_labels.push_back(child.label);
    }
  }
  if (!pending.tokens.empty() || !pending.covered_node_labels.empty()) {
    ClauseSpan& last = spans.back();
    last.tokens.insert(last.tokens.end(),
                       std::make_move_iterator(pending.tokens.begin()),
                       std::make_move_iterator(pending.tokens.end()));
    last.covered_node_labels.insert(last.covered_node_labels.end(),
                                    pending.covered_node_labels.begin(),
                                    pending.covered_node_labels.end());
  }
  return spans;
}

std::vector<ClauseSpan> segment_story(const std::vector<ParseNode>& trees) {
  std::vector<ClauseSpan> spans;
  for (std::size_t i = 0; i < trees.size(); ++i) {
    std::vector<ClauseSpan> sentence_spans = segment_sentence(trees[i]);
    for (ClauseSpan& span : sentence_spans) {
      span.source_sentence = static_cast<int>(i);
      spans.push_back(std::move(span));
    }
  }
  return spans;
}

std::vector<TreeStory> load_tree_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open tree file: " + path.string());

  std::vector<TreeStory> stories;
  std::string line;
  std::size_t line_no = 0;
  TreeStory current;
  bool json_format = false;
  bool format_known = false;

  auto flush = [&]() {
    if (!current.trees.empty()) {
      if (current.story_id.empty()) {
        current.story_id = "story-" + std::to_string(stories.size());
      }
      stories.push_back(std::move(current));
      current = TreeStory{};
    }
  };

  while (std::getline(in, line)) {
    ++line_no;
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
      if (!json_format) flush();
      continue;
    }
    if (!format_known) {
      json_format = line[first] == '{';
      format_known = true;
    }
    try {
      if (json_format) {
        nlohmann::json record = nlohmann::json::parse(line);
        TreeStory story;
        story.story_id = record.at("story_id").get<std::string>();
        for (const auto& t : record.at("trees")) {
          story.trees.push_back(parse_bracketed(t.get<std::string>()));
        }
        stories.push_back(std::move(story));
      } else {
        current.trees.push_back(parse_bracketed(line));
      }
    } catch (const nlohmann::json::exception& e) {
      throw DataError("tree file line " + std::to_string(line_no) + ": " +
                      e.what());
    } catch (const DataError& e) {
      throw DataError("tree file line " + std::to_string(line_no) + ": " +
                      e.what());
    }
  }
  if (!json_format) flush();
  return stories;
}

}  // namespace narrative
