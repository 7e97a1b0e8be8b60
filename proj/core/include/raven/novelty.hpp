#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "raven/corpus.hpp"
#include "raven/index.hpp"

namespace raven {

// Which earlier text counts as a source of duplication.
enum class SourceMode { TrainingAndContext, TrainingOnly, ContextOnly };

const char* to_string(SourceMode mode);
SourceMode parse_source_mode(std::string_view name);  // "both", "train", "context"

inline constexpr std::uint32_t kNoCap = std::numeric_limits<std::uint32_t>::max();
inline constexpr std::uint32_t kSupercopyThreshold = 100;
inline constexpr std::uint32_t kLeadGramLength = 100;

struct NoveltyOptions {
  // When set, n-grams ending in the continuation may reach back into the
  // prompt. By default they are confined to the continuation, so position t
  // supports n <= t + 1.
  bool ngrams_cross_prompt = false;
};

// Per continuation position: length of the longest suffix ending there that
// is duplicated from training, and from earlier context. Both are clipped to
// the longest checkable n-gram at that position.
struct DuplicationLengths {
  std::vector<std::uint32_t> training;
  std::vector<std::uint32_t> context;
  std::vector<std::uint32_t> window;  // longest checkable n per position

  std::uint32_t longest(std::size_t t, SourceMode mode) const;
};

DuplicationLengths duplication_lengths(const SuffixIndex& index, const GenerationRecord& record,
                                       const NoveltyOptions& opts = {});

bool is_duplicated(const SuffixIndex& index, const GenerationRecord& record, std::uint32_t n,
                   std::size_t t, SourceMode mode, const NoveltyOptions& opts = {});

struct NoveltyRow {
  std::uint32_t n = 0;
  std::uint64_t total = 0;
  std::uint64_t novel = 0;
  std::optional<double> fraction;        // pooled over records (micro); absent when total = 0
  std::optional<double> macro_fraction;  // mean of per-record fractions
};

struct NoveltyProfile {
  SourceMode mode = SourceMode::TrainingAndContext;
  std::vector<NoveltyRow> rows;  // n_min..n_max
};

NoveltyProfile novelty_profile(const SuffixIndex& index, std::span<const GenerationRecord> records,
                               std::uint32_t n_min, std::uint32_t n_max, SourceMode mode,
                               const NoveltyOptions& opts = {}, unsigned jobs = 1);

struct DuplicationSeries {
  std::vector<std::uint32_t> scores;
  std::uint32_t cap = 5;
  double truncated_mean = 0.0;
  double mean = 0.0;
};

double truncated_mean(std::span<const std::uint32_t> scores, std::uint32_t cap);

// score[t] is the size of the smallest novel n-gram ending at t; when every
// checkable n-gram is duplicated the score is one beyond the longest one.
DuplicationSeries pointwise_scores(const SuffixIndex& index, const GenerationRecord& record,
                                   SourceMode mode, std::uint32_t cap = 5,
                                   const NoveltyOptions& opts = {});

struct SupercopySpan {
  std::size_t start = 0;
  std::size_t length = 0;
  std::uint64_t train_occurrences = 0;
  std::optional<std::uint64_t> lead_100gram_occurrences;
};

// Maximal continuation spans (length >= threshold) found verbatim in training.
std::vector<SupercopySpan> find_supercopies(const SuffixIndex& index, const GenerationRecord& record,
                                            std::uint32_t threshold = kSupercopyThreshold);

struct PositionBin {
  std::size_t begin = 0;  // first position in the bin
  std::size_t end = 0;    // one past the last position
  std::uint64_t tokens = 0;
  double mean = 0.0;
};

struct PositionProfile {
  std::size_t bin_width = 100;
  std::uint32_t cap = 10;
  bool first_bin_discarded = true;
  std::vector<PositionBin> bins;
};

PositionProfile position_profile(const SuffixIndex& index, std::span<const GenerationRecord> records,
                                 SourceMode mode = SourceMode::TrainingOnly,
                                 std::size_t bin_width = 100, std::uint32_t cap = 10,
                                 const NoveltyOptions& opts = {}, unsigned jobs = 1);

// Unigram novelty against training alone, per continuation token.
std::vector<bool> unigram_novelty(const SuffixIndex& index, std::span<const TokenId> tokens);

struct QuoteConfig {
  std::vector<std::string> openers{"``", "\""};
  std::vector<std::string> closers{"''", "\""};
};

struct QuoteStats {
  std::uint64_t tokens = 0;          // non-quote tokens
  std::uint64_t novel = 0;
  std::uint64_t in_quotes = 0;
  std::uint64_t novel_in_quotes = 0;
  std::uint64_t unmatched_openers = 0;
  std::vector<std::string> warnings;

  std::optional<double> p_novel() const;
  std::optional<double> p_quotes() const;
  std::optional<double> p_novel_given_quotes() const;
  std::optional<double> p_quotes_given_novel() const;
};

// `sequences[i]` are the token strings of one continuation and `novel[i]`
// its per-token novelty flags.
QuoteStats quote_statistics(std::span<const std::vector<std::string>> sequences,
                            std::span<const std::vector<bool>> novel,
                            const QuoteConfig& config = {});

}  // namespace raven
