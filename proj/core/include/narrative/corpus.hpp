#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "narrative/types.hpp"

namespace narrative {

// --- tokenization -----------------------------------------------------------

/// Whitespace-plus-punctuation tokenizer. Alphanumeric runs (with internal
/// apostrophes/hyphens) form word tokens; every other non-space character is
/// its own token. Case is preserved; bytes >= 0x80 count as word characters.
std::vector<std::string> tokenize(std::string_view text);

/// ASCII lowercasing, used wherever statistics are case-folded.
std::string case_fold(std::string_view s);

// --- ingestion --------------------------------------------------------------

/// Reads a UTF-8 JSON-lines corpus, one story per line. Tokens are taken from
/// the record when present, otherwise derived from "text" via tokenize().
/// Gold labels are never read from the file; aggregation derives them.
/// Throws DataError with the line number on any schema violation.
std::vector<Story> load_corpus(const std::filesystem::path& path);

/// Writes stories back as JSON lines, including derived gold/agreement fields
/// when present. Output is byte-stable for a fixed input corpus and seed.
void write_corpus(const std::vector<Story>& corpus,
                  const std::filesystem::path& path);

std::size_t clause_count(const std::vector<Story>& corpus);

/// clause_id -> clause lookup across the whole corpus.
std::unordered_map<std::string, const Clause*> index_clauses(
    const std::vector<Story>& corpus);

std::vector<const Clause*> collect_clauses(
    const std::vector<Story>& corpus, const std::vector<std::string>& ids);

// --- gold-label aggregation -------------------------------------------------

struct GoldLabel {
  ClauseType gold;
  int agreement;  // annotators whose label equals gold
};

/// Majority vote; ties broken uniformly at random, deterministic in rng_seed.
GoldLabel aggregate_gold_label(const AnnotationSet& annotations,
                               std::uint64_t rng_seed);

/// Aggregates every clause in place. Each clause gets its own tie-break
/// stream seeded by derive_seed(clause_id, seed), so results do not depend on
/// corpus order.
void aggregate_corpus(std::vector<Story>& corpus, std::uint64_t seed);

// --- corpus statistics ------------------------------------------------------

struct LabelStats {
  std::size_t count = 0;
  double fraction = 0.0;
  double mean_agreement = 0.0;  // 0 when no clause has this label
};

/// Per-type share of clauses and mean agreement. Requires aggregated corpus.
std::map<ClauseType, LabelStats> label_distribution(
    const std::vector<Story>& corpus);

struct AgreementCounts {
  std::size_t at_least_two = 0;
  std::size_t exactly_three = 0;
  double mean_agreement = 0.0;  // mean of the per-clause agreement field
};

AgreementCounts agreement_counts(const std::vector<Story>& corpus);

struct BigramStat {
  std::string first;
  std::string second;
  std::size_t count = 0;
  double fraction = 0.0;  // of all within-clause bigrams
};

struct StatsReport {
  std::size_t story_count = 0;
  std::size_t clause_count = 0;
  std::size_t token_count = 0;
  std::size_t bigram_total = 0;
  double mean_clauses_per_story = 0.0;
  double mean_tokens_per_clause = 0.0;
  std::vector<BigramStat> top_bigrams;
  std::string query_word;
  double query_word_mean_per_story = 0.0;
};

/// Token/bigram statistics. Bigrams are within-clause, case-folded; clause
/// boundaries never form bigrams.
StatsReport corpus_stats(const std::vector<Story>& corpus,
                         std::size_t top_k = 10,
                         std::string_view query_word = "you");

// --- dataset splitting ------------------------------------------------------

struct SplitOptions {
  std::array<double, 3> fractions = {0.86, 0.07, 0.07};  // train/val/test
  int min_agreement = 2;
  bool drop_not_story = true;
  std::uint64_t seed = 0;
};

/// Shuffles stories with the seed, assigns whole stories to partitions by
/// fraction, then filters clauses by agreement and (optionally) NotStory.
/// No story contributes clauses to two partitions.
DatasetSplit split_dataset(const std::vector<Story>& corpus,
                           const SplitOptions& options);

}  // namespace narrative
