#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "raven/corpus.hpp"
#include "raven/index.hpp"

namespace raven::lab {

// Anything that can assign log P(next | preceding tokens).
class TokenScorer {
 public:
  virtual ~TokenScorer() = default;
  virtual double log_prob(std::span<const TokenId> history, TokenId next) const = 0;
};

// Additively smoothed n-gram model with simple backoff:
//
//   P(w | ctx) = (count(ctx w) + alpha) / (count(ctx .) + alpha * V)
//
// using the longest context of up to order-1 tokens that was seen with a
// successor in training, down to the unigram table.
class NGramLM : public TokenScorer {
 public:
  static NGramLM train(const TokenCorpus& corpus, std::size_t vocab_size, unsigned order, double alpha);

  double prob(std::span<const TokenId> history, TokenId next) const;
  double log_prob(std::span<const TokenId> history, TokenId next) const override;
  // Fills `out` with the full next-token distribution (size V).
  void distribution(std::span<const TokenId> history, std::vector<double>& out) const;

  unsigned order() const noexcept { return order_; }
  std::size_t vocab_size() const noexcept { return vocab_size_; }
  double alpha() const noexcept { return alpha_; }
  // Hash of the training corpus; equal fingerprints mean the same split.
  std::uint64_t training_fingerprint() const noexcept { return fingerprint_; }

 private:
  struct Successors {
    std::uint64_t total = 0;
    std::vector<std::pair<TokenId, std::uint32_t>> counts;  // sorted by id
  };
  // Longest usable context table entry for this history.
  const Successors& lookup(std::span<const TokenId> history) const;

  unsigned order_ = 1;
  std::size_t vocab_size_ = 0;
  double alpha_ = 1.0;
  std::uint64_t fingerprint_ = 0;
  Successors unigram_;
  // tables_[c - 1] maps a context of c tokens to its successor counts.
  std::vector<std::unordered_map<std::u32string, Successors>> tables_;
};

struct DecodingConfig {
  std::optional<std::size_t> top_k;  // unset = no truncation
  double top_p = 1.0;
  double temperature = 1.0;
  std::uint64_t seed = 0;

  std::string label() const;
};

// Temperature, then top-k, then top-p. Ties in probability rank by smaller id.
std::vector<double> apply_decoding(std::span<const double> dist, const DecodingConfig& cfg);

GenerationRecord sample_continuation(const NGramLM& lm, std::span<const TokenId> prompt,
                                     std::size_t length, const DecodingConfig& cfg);

struct PerplexityConfig {
  std::size_t stride = 512;
  std::size_t max_len = 1024;
};

struct NllTotal {
  double sum = 0.0;
  std::size_t tokens = 0;
};

// Scores tokens in consecutive segments of max_len, each conditioned on the
// `stride` tokens that precede the segment (the first segment has no prior
// context).
NllTotal sliding_nll(const TokenScorer& scorer, std::span<const TokenId> tokens,
                     const PerplexityConfig& cfg = {});
double sliding_perplexity(const TokenScorer& scorer, std::span<const TokenId> tokens,
                          const PerplexityConfig& cfg = {});

struct SweepRow {
  DecodingConfig config;
  double dup_truncated = 0.0;    // mean pointwise duplication, truncated at cap
  double dup_untruncated = 0.0;
  double perplexity = 0.0;       // under the evaluator model
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<std::string> warnings;
};

struct SweepOptions {
  std::size_t length = 100;
  std::uint32_t cap = 5;
  PerplexityConfig perplexity{};
  unsigned jobs = 1;
};

// For each config: sample a continuation per prompt, score duplication
// against `index` (training + context) and perplexity under `evaluator`.
SweepResult tradeoff_sweep(const NGramLM& generator, const SuffixIndex& index,
                           std::span<const TokenSeq> prompts, std::span<const DecodingConfig> grid,
                           const NGramLM& evaluator, const SweepOptions& opts = {});

// Spearman rank correlation with average ranks for ties; nullopt when either
// side is constant.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

// Synthetic text from a sparse random second-order Markov source with a
// Zipf-like vocabulary. Documents are `doc_length` tokens long.
TokenCorpus synthetic_corpus(std::size_t tokens, std::size_t vocab_size, std::uint64_t seed,
                             std::size_t doc_length = 500);

}  // namespace raven::lab
