#include "narrative/features.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "narrative/corpus.hpp"
#include "narrative/rng.hpp"

namespace narrative {

Vocabulary Vocabulary::build(const std::vector<const Clause*>& training_clauses,
                             int min_count) {
  if (training_clauses.empty()) {
    throw DataError("cannot build a vocabulary from an empty training set");
  }
  std::map<std::string, std::size_t> counts;  // ordered map keeps ties stable
  for (const Clause* clause : training_clauses) {
    for (const Token& token : clause->tokens) {
      counts[case_fold(token.text)]++;
    }
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (const auto& [token, count] : counts) {
    if (count > static_cast<std::size_t>(min_count)) kept.emplace_back(token, count);
  }
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary vocab;
  vocab.min_count_ = min_count;
  vocab.unk_index_ = 0;
  vocab.tokens_.emplace_back(kUnkToken);
  for (auto& [token, count] : kept) vocab.tokens_.push_back(std::move(token));
  for (std::size_t i = 0; i < vocab.tokens_.size(); ++i) {
    vocab.index_.emplace(vocab.tokens_[i], static_cast<int>(i));
  }
  return vocab;
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens,
                                   int min_count) {
  if (tokens.empty()) throw DataError("empty vocabulary token list");
  Vocabulary vocab;
  vocab.min_count_ = min_count;
  vocab.tokens_ = std::move(tokens);
  int unk = -1;
  for (std::size_t i = 0; i < vocab.tokens_.size(); ++i) {
    if (!vocab.index_.emplace(vocab.tokens_[i], static_cast<int>(i)).second) {
      throw DataError("duplicate vocabulary token: " + vocab.tokens_[i]);
    }
    if (vocab.tokens_[i] == kUnkToken) unk = static_cast<int>(i);
  }
  if (unk < 0) throw DataError("vocabulary token list lacks <unk>");
  vocab.unk_index_ = unk;
  return vocab;
}

int Vocabulary::lookup(std::string_view token) const {
  auto it = index_.find(case_fold(token));
  return it == index_.end() ? unk_index_ : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.find(case_fold(token)) != index_.end();
}

std::uint64_t Vocabulary::content_hash() const {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (const std::string& token : tokens_) {
    h = fnv1a64(token) ^ (h * 0x100000001B3ull);
  }
  return h;
}

LoadedEmbeddings load_embeddings(const std::filesystem::path& path,
                                 const Vocabulary& vocab, std::uint64_t seed,
                                 int dim) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file: " + path.string());

  LoadedEmbeddings result;
  result.vocab_size = vocab.size();
  result.table.trainable = true;  // non-static embeddings
  result.table.rows =
      random_embeddings(vocab.size(), dim, seed).rows;  // fallback init

  std::vector<bool> hit(vocab.size(), false);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string token;
    fields >> token;
    if (token.empty()) continue;
    if (!vocab.contains(token)) {
      // still validate the line's shape so dimension errors never pass silently
      double value;
      int count = 0;
      while (fields >> value) ++count;
      if (count != dim) {
        throw DataError("embedding file line " + std::to_string(line_no) +
                        ": expected " + std::to_string(dim) +
                        " values, got " + std::to_string(count));
      }
      continue;
    }
    int row = vocab.lookup(token);
    int col = 0;
    double value;
    while (fields >> value) {
      if (col >= dim) break;
      result.table.rows(row, col++) = static_cast<float>(value);
    }
    if (col != dim || (fields >> value)) {
      throw DataError("embedding file line " + std::to_string(line_no) +
                      ": expected " + std::to_string(dim) + " values");
    }
    if (!hit[static_cast<std::size_t>(row)]) {
      hit[static_cast<std::size_t>(row)] = true;
      ++result.pretrained_hits;
    }
  }
  return result;
}

EmbeddingTable random_embeddings(std::size_t vocab_size, int dim,
                                 std::uint64_t seed) {
  EmbeddingTable table;
  table.trainable = true;
  table.rows.resize(static_cast<Eigen::Index>(vocab_size), dim);
  SplitMix64 rng(seed);
  for (Eigen::Index r = 0; r < table.rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < table.rows.cols(); ++c) {
      table.rows(r, c) = static_cast<float>(rng.uniform_real(-0.25, 0.25));
    }
  }
  return table;
}

PosTagset PosTagset::penn_treebank() {
  static const std::vector<std::string> kTags = {
      // 36 word-level tags
      "CC", "CD", "DT", "EX", "FW", "IN", "JJ", "JJR", "JJS", "LS", "MD",
      "NN", "NNS", "NNP", "NNPS", "PDT", "POS", "PRP", "PRP$", "RB", "RBR",
      "RBS", "RP", "SYM", "TO", "UH", "VB", "VBD", "VBG", "VBN", "VBP",
      "VBZ", "WDT", "WP", "WP$", "WRB",
      // 9 punctuation/auxiliary tags
      "#", "$", "''", "-LRB-", "-RRB-", ",", ".", ":", "``"};
  return from_tags(kTags, "ptb45-v1");
}

PosTagset PosTagset::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open tagset file: " + path.string());
  std::vector<std::string> tags;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.pop_back();
    }
    if (line.empty()) continue;
    tags.push_back(line);
  }
  std::string version =
      path.filename().string() + "@" +
      [&] {
        std::uint64_t h = 0xCBF29CE484222325ull;
        for (const std::string& t : tags) h = fnv1a64(t) ^ (h * 0x100000001B3ull);
        std::ostringstream hex;
        hex << std::hex << h;
        return hex.str();
      }();
  return from_tags(std::move(tags), std::move(version));
}

PosTagset PosTagset::from_tags(std::vector<std::string> tags,
                               std::string version) {
  if (tags.size() != kSize) {
    throw DataError("tagset must contain exactly 45 tags, got " +
                    std::to_string(tags.size()));
  }
  PosTagset tagset;
  tagset.tags_ = std::move(tags);
  tagset.version_ = std::move(version);
  for (std::size_t i = 0; i < tagset.tags_.size(); ++i) {
    if (!tagset.index_.emplace(tagset.tags_[i], static_cast<int>(i)).second) {
      throw DataError("duplicate tag in tagset: " + tagset.tags_[i]);
    }
  }
  return tagset;
}

int PosTagset::index_of(std::string_view tag) const {
  auto it = index_.find(std::string(tag));
  return it == index_.end() ? -1 : it->second;
}

EncodedClause encode_clause(const Clause& clause, const Vocabulary& vocab,
                            const PosTagset& tagset,
                            const FeatureConfig& config) {
  if (clause.tokens.empty()) {
    throw DataError("cannot encode empty clause " + clause.clause_id);
  }
  EncodedClause encoded;
  encoded.clause_id = clause.clause_id;
  encoded.text = clause.text;
  encoded.word_ids.reserve(clause.tokens.size());
  encoded.pos_ids.reserve(clause.tokens.size());
  for (const Token& token : clause.tokens) {
    encoded.word_ids.push_back(vocab.lookup(token.text));
    if (token.pos) {
      encoded.pos_ids.push_back(tagset.index_of(*token.pos));
    } else {
      if (config.use_pos) {
        throw DataError("token \"" + token.text + "\" in " + clause.clause_id +
                        " is untagged but POS features are enabled");
      }
      encoded.pos_ids.push_back(-1);
    }
  }
  if (clause.gold) encoded.label = class_index(*clause.gold);
  if (clause.agreement) encoded.agreement = *clause.agreement;
  return encoded;
}

std::vector<EncodedClause> encode_clauses(
    const std::vector<const Clause*>& clauses, const Vocabulary& vocab,
    const PosTagset& tagset, const FeatureConfig& config) {
  std::vector<EncodedClause> encoded;
  encoded.reserve(clauses.size());
  for (const Clause* clause : clauses) {
    encoded.push_back(encode_clause(*clause, vocab, tagset, config));
  }
  return encoded;
}

Eigen::MatrixXf assemble_matrix(const EncodedClause& encoded,
                                const EmbeddingTable& table,
                                const FeatureConfig& config, int pad_to) {
  if (encoded.word_ids.empty()) throw DataError("empty encoded clause");
  if (pad_to < 1) throw std::invalid_argument("pad_to must be positive");
  const int t = static_cast<int>(encoded.word_ids.size());
  const int rows = std::max(t, pad_to);
  Eigen::MatrixXf matrix =
      Eigen::MatrixXf::Zero(rows, config.per_token_dim());
  for (int i = 0; i < t; ++i) {
    matrix.row(i).head(config.embedding_dim) =
        table.rows.row(encoded.word_ids[static_cast<std::size_t>(i)]);
    int pos = encoded.pos_ids[static_cast<std::size_t>(i)];
    if (config.use_pos && pos >= 0 && pos < config.pos_dim) {
      matrix(i, config.embedding_dim + pos) = 1.0f;
    }
  }
  return matrix;
}

Eigen::MatrixXf clause_matrix(const Clause& clause, const Vocabulary& vocab,
                              const EmbeddingTable& table,
                              const PosTagset& tagset, int pad_to) {
  FeatureConfig config;
  config.embedding_dim = table.dim();
  config.pos_dim = static_cast<int>(tagset.size());
  if (pad_to < config.max_filter_width) {
    throw std::invalid_argument("pad_to must be at least the widest filter (" +
                                std::to_string(config.max_filter_width) + ")");
  }
  if (clause.tokens.empty()) {
    throw DataError("cannot featurize empty clause " + clause.clause_id);
  }
  EncodedClause encoded;
  encoded.clause_id = clause.clause_id;
  for (const Token& token : clause.tokens) {
    encoded.word_ids.push_back(vocab.lookup(token.text));
    // tags outside the tagset one-hot to all zeros
    encoded.pos_ids.push_back(token.pos ? tagset.index_of(*token.pos) : -1);
  }
  return assemble_matrix(encoded, table, config, pad_to);
}

Eigen::VectorXf pos_feature_vector(const Clause& clause,
                                   const PosTagset& tagset) {
  if (clause.tokens.empty()) {
    throw DataError("cannot featurize empty clause " + clause.clause_id);
  }
  const int n = static_cast<int>(tagset.size());
  Eigen::VectorXf features = Eigen::VectorXf::Zero(2 * n);
  for (const Token& token : clause.tokens) {
    if (!token.pos) continue;
    int idx = tagset.index_of(*token.pos);
    if (idx < 0) continue;
    features(idx) = 1.0f;                // indicator block (POS:IND-*)
    features(n + idx) += 1.0f;           // raw count, normalized below
  }
  features.tail(n) /= static_cast<float>(clause.tokens.size());
  return features;
}

}  // namespace narrative
