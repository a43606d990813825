#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "narrative/types.hpp"

namespace narrative {

struct FeatureConfig {
  int embedding_dim = 300;
  int pos_dim = 45;
  int min_count = 2;        // tokens with frequency <= min_count map to UNK
  int max_filter_width = 4;
  bool use_pos = true;      // ablation toggle; off zeroes the POS block

  int per_token_dim() const { return embedding_dim + pos_dim; }
};

/// Closed token->index mapping: every lookup succeeds, unseen or rare tokens
/// fall back to the UNK index. Lookups are case-folded.
class Vocabulary {
 public:
  static constexpr std::string_view kUnkToken = "<unk>";

  /// Builds from training clauses only. Tokens with frequency > min_count get
  /// indices ordered by (frequency desc, token asc); UNK sits at index 0.
  static Vocabulary build(const std::vector<const Clause*>& training_clauses,
                          int min_count);

  /// Reconstruction from a stored token list (index order, UNK included).
  static Vocabulary from_tokens(std::vector<std::string> tokens, int min_count);

  int lookup(std::string_view token) const;
  bool contains(std::string_view token) const;
  int unk_index() const { return unk_index_; }
  std::size_t size() const { return tokens_.size(); }
  int min_count() const { return min_count_; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  /// FNV-1a over the token list in index order; the checkpoint identity.
  std::uint64_t content_hash() const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  int unk_index_ = 0;
  int min_count_ = 0;
};

struct EmbeddingTable {
  Eigen::MatrixXf rows;  // |V| x dim
  bool trainable = true;

  int dim() const { return static_cast<int>(rows.cols()); }
};

struct LoadedEmbeddings {
  EmbeddingTable table;
  std::size_t pretrained_hits = 0;  // vocab rows found in the file
  std::size_t vocab_size = 0;

  double coverage() const {
    return vocab_size == 0 ? 0.0
                           : static_cast<double>(pretrained_hits) /
                                 static_cast<double>(vocab_size);
  }
};

/// Loads "token v1 ... vdim" lines. Vocabulary rows found in the file get the
/// pretrained vector; all others (UNK included) are seeded uniform(-.25, .25).
LoadedEmbeddings load_embeddings(const std::filesystem::path& path,
                                 const Vocabulary& vocab, std::uint64_t seed,
                                 int dim = 300);

/// Fully random table (test/bootstrap use), same init convention.
EmbeddingTable random_embeddings(std::size_t vocab_size, int dim,
                                 std::uint64_t seed);

/// The fixed 45-tag one-hot index contract.
class PosTagset {
 public:
  static constexpr int kSize = 45;

  /// Built-in default: the 36 Penn Treebank word-level tags followed by the 9
  /// punctuation/auxiliary tags (# $ '' -LRB- -RRB- , . : ``).
  static PosTagset penn_treebank();

  /// Plain-text file, one tag per line, exactly 45 unique lines.
  static PosTagset from_file(const std::filesystem::path& path);

  static PosTagset from_tags(std::vector<std::string> tags,
                             std::string version);

  int index_of(std::string_view tag) const;  // -1 when absent
  std::size_t size() const { return tags_.size(); }
  const std::vector<std::string>& tags() const { return tags_; }
  const std::string& version() const { return version_; }

 private:
  std::vector<std::string> tags_;
  std::unordered_map<std::string, int> index_;
  std::string version_;
};

/// Vocabulary/tagset ids for one clause; the classifier's input unit.
struct EncodedClause {
  std::string clause_id;
  std::string text;
  std::vector<int> word_ids;
  std::vector<int> pos_ids;  // -1 = tag absent or outside the tagset
  int label = -1;            // class index, -1 when unlabeled
  int agreement = 0;
};

/// Requires every token tagged when config.use_pos is set; tags outside the
/// tagset encode as -1 (an all-zero one-hot block).
EncodedClause encode_clause(const Clause& clause, const Vocabulary& vocab,
                            const PosTagset& tagset,
                            const FeatureConfig& config);

std::vector<EncodedClause> encode_clauses(
    const std::vector<const Clause*>& clauses, const Vocabulary& vocab,
    const PosTagset& tagset, const FeatureConfig& config);

/// Embedding-plus-one-hot matrix for an encoded clause, right-padded with zero
/// rows to at least pad_to rows.
Eigen::MatrixXf assemble_matrix(const EncodedClause& encoded,
                                const EmbeddingTable& table,
                                const FeatureConfig& config, int pad_to);

/// Row t = embedding(token_t) concatenated with onehot(pos_t); T' = max(T, pad_to).
Eigen::MatrixXf clause_matrix(const Clause& clause, const Vocabulary& vocab,
                              const EmbeddingTable& table,
                              const PosTagset& tagset, int pad_to);

/// 45 binary tag-presence indicators followed by 45 normalized tag counts;
/// the feature-baseline representation.
Eigen::VectorXf pos_feature_vector(const Clause& clause,
                                   const PosTagset& tagset);

}  // namespace narrative
