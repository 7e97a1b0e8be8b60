#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "raven/error.hpp"
#include "raven/lab.hpp"
#include "oracles.hpp"

using namespace raven;
using namespace raven::lab;

namespace {

NGramLM abab_lm() { return NGramLM::train(TokenCorpus::from_documents({{0, 1, 0, 1}}), 2, 2, 1.0); }

class UniformScorer : public TokenScorer {
 public:
  explicit UniformScorer(double v) : v_(v) {}
  double log_prob(std::span<const TokenId>, TokenId) const override { return -std::log(v_); }

 private:
  double v_;
};

class CertainScorer : public TokenScorer {
 public:
  double log_prob(std::span<const TokenId>, TokenId) const override { return 0.0; }
};

// Scores by a hash of the exact history, so any change in conditioning context
// changes the result.
class HistoryScorer : public TokenScorer {
 public:
  double log_prob(std::span<const TokenId> history, TokenId next) const override {
    std::uint64_t h = 1469598103934665603ull ^ next;
    for (auto t : history) h = (h ^ t) * 1099511628211ull;
    return -1.0 - static_cast<double>(h % 1000) / 1000.0;
  }
};

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST(NGramLM, LidstoneBigram) {
  const auto lm = abab_lm();
  const TokenSeq a{0};
  EXPECT_DOUBLE_EQ(lm.prob(a, 1), 0.75);
  EXPECT_DOUBLE_EQ(lm.prob(a, 0), 0.25);
  std::vector<double> dist;
  lm.distribution(a, dist);
  EXPECT_NEAR(sum(dist), 1.0, 1e-12);
}

TEST(NGramLM, BackoffToUnigram) {
  const auto lm = NGramLM::train(TokenCorpus::from_documents({{0, 1, 0, 2}}), 3, 2, 1.0);
  // "b" is followed by "a" once: (1 + 1) / (1 + 3).
  EXPECT_DOUBLE_EQ(lm.prob(TokenSeq{1}, 0), 0.5);
  // "c" is never followed by anything, so its context backs off to the
  // unigram table: (2 + 1) / (4 + 3).
  EXPECT_DOUBLE_EQ(lm.prob(TokenSeq{2}, 0), 3.0 / 7.0);
  EXPECT_DOUBLE_EQ(lm.prob({}, 1), 2.0 / 7.0);
}

TEST(NGramLM, DistributionsNormalize) {
  const auto corpus = synthetic_corpus(5000, 40, 3);
  const auto lm = NGramLM::train(corpus, 40, 3, 0.1);
  std::mt19937_64 rng(1);
  std::vector<double> dist;
  for (int i = 0; i < 200; ++i) {
    TokenSeq ctx(rng() % 4);
    for (auto& t : ctx) t = static_cast<TokenId>(rng() % 40);
    lm.distribution(ctx, dist);
    ASSERT_NEAR(sum(dist), 1.0, 1e-9);
  }
}

TEST(NGramLM, RejectsBadAlpha) {
  EXPECT_THROW(NGramLM::train(TokenCorpus::from_documents({{0, 1}}), 2, 2, 0.0), Error);
  EXPECT_THROW(NGramLM::train(TokenCorpus::from_documents({{0, 1}}), 2, 2, -1.0), Error);
}

TEST(ApplyDecoding, Examples) {
  const std::vector<double> dist{0.5, 0.3, 0.2};
  DecodingConfig k2;
  k2.top_k = 2;
  const auto pk = apply_decoding(dist, k2);
  EXPECT_NEAR(pk[0], 0.625, 1e-15);
  EXPECT_NEAR(pk[1], 0.375, 1e-15);
  EXPECT_EQ(pk[2], 0.0);

  DecodingConfig p7;
  p7.top_p = 0.7;
  const auto pp = apply_decoding(dist, p7);
  EXPECT_NEAR(pp[0], 0.625, 1e-15);
  EXPECT_NEAR(pp[1], 0.375, 1e-15);
  EXPECT_EQ(pp[2], 0.0);

  EXPECT_EQ(apply_decoding(dist, DecodingConfig{}), dist);
}

TEST(ApplyDecoding, TiesBreakBySmallerId) {
  const std::vector<double> dist{0.2, 0.4, 0.4};
  DecodingConfig k1;
  k1.top_k = 1;
  EXPECT_EQ(apply_decoding(dist, k1), (std::vector<double>{0.0, 1.0, 0.0}));
}

TEST(ApplyDecoding, Errors) {
  const std::vector<double> dist{0.5, 0.5};
  DecodingConfig c;
  c.top_k = 0;
  EXPECT_THROW(apply_decoding(dist, c), Error);
  c = {};
  c.top_p = 0.0;
  EXPECT_THROW(apply_decoding(dist, c), Error);
  c = {};
  c.temperature = 0.0;
  EXPECT_THROW(apply_decoding(dist, c), Error);
}

TEST(ApplyDecoding, Invariants) {
  std::mt19937_64 rng(17);
  for (int iter = 0; iter < 500; ++iter) {
    const std::size_t v = 1 + rng() % 30;
    std::vector<double> dist(v);
    for (auto& x : dist) x = static_cast<double>(rng() % 1000 + 1);
    const double total = sum(dist);
    for (auto& x : dist) x /= total;

    DecodingConfig cfg;
    cfg.top_k = 1 + rng() % v;
    const auto pk = apply_decoding(dist, cfg);
    ASSERT_NEAR(sum(pk), 1.0, 1e-9);
    ASSERT_LE(static_cast<std::size_t>(std::count_if(pk.begin(), pk.end(), [](double x) { return x > 0; })),
              *cfg.top_k);
    // Retained entries keep their ratios.
    for (std::size_t i = 0; i < v; ++i)
      for (std::size_t j = 0; j < v; ++j) {
        if (pk[i] > 0 && pk[j] > 0) {
          ASSERT_NEAR(pk[i] / pk[j], dist[i] / dist[j], 1e-9);
        }
      }

    cfg = {};
    cfg.top_k = v;
    const auto full_k = apply_decoding(dist, cfg);
    for (std::size_t i = 0; i < v; ++i) ASSERT_NEAR(full_k[i], dist[i], 1e-15);

    cfg = {};
    cfg.temperature = 0.3 + static_cast<double>(rng() % 20) / 10.0;
    const auto pt = apply_decoding(dist, cfg);
    ASSERT_NEAR(sum(pt), 1.0, 1e-9);
    for (std::size_t i = 1; i < v; ++i)
      ASSERT_NEAR(std::log(pt[i] / pt[0]), std::log(dist[i] / dist[0]) / cfg.temperature, 1e-9);

    cfg = {};
    cfg.top_p = 0.05 + static_cast<double>(rng() % 95) / 100.0;
    const auto pp = apply_decoding(dist, cfg);
    ASSERT_NEAR(sum(pp), 1.0, 1e-9);
    double kept = 0.0;
    for (std::size_t i = 0; i < v; ++i)
      if (pp[i] > 0) kept += dist[i];
    ASSERT_GE(kept, cfg.top_p - 1e-9);
  }
}

TEST(SampleContinuation, GreedyIgnoresSeedAndFollowsArgmax) {
  const auto corpus = synthetic_corpus(3000, 30, 5);
  const auto lm = NGramLM::train(corpus, 30, 3, 0.1);
  const TokenSeq prompt{1, 2};
  DecodingConfig g1, g2;
  g1.top_k = g2.top_k = 1;
  g1.seed = 1;
  g2.seed = 99;
  const auto a = sample_continuation(lm, prompt, 40, g1);
  const auto b = sample_continuation(lm, prompt, 40, g2);
  EXPECT_EQ(a.continuation, b.continuation);

  TokenSeq text = prompt;
  std::vector<double> dist;
  for (std::size_t i = 0; i < 40; ++i) {
    lm.distribution(text, dist);
    const auto best = static_cast<TokenId>(std::max_element(dist.begin(), dist.end()) - dist.begin());
    ASSERT_EQ(a.continuation[i], best);
    text.push_back(best);
  }
}

TEST(SampleContinuation, DeterministicPerSeed) {
  const auto lm = NGramLM::train(synthetic_corpus(3000, 30, 5), 30, 3, 0.1);
  DecodingConfig cfg;
  cfg.seed = 42;
  const TokenSeq prompt{3};
  EXPECT_EQ(sample_continuation(lm, prompt, 50, cfg).continuation,
            sample_continuation(lm, prompt, 50, cfg).continuation);
}

TEST(SampleContinuation, EmpiricalFrequenciesMatchModel) {
  const auto lm = NGramLM::train(TokenCorpus::from_documents({{0, 1, 2, 0, 1, 1, 3, 0, 2, 4}}), 5, 2, 0.5);
  const TokenSeq prompt{0};
  std::vector<double> dist;
  lm.distribution(prompt, dist);
  std::vector<double> hits(5, 0.0);
  constexpr int kDraws = 10000;
  DecodingConfig cfg;
  cfg.top_k = 5;
  for (int s = 0; s < kDraws; ++s) {
    cfg.seed = static_cast<std::uint64_t>(s);
    ++hits[sample_continuation(lm, prompt, 1, cfg).continuation[0]];
  }
  for (std::size_t i = 0; i < 5; ++i) {
    const double sigma = std::sqrt(kDraws * dist[i] * (1 - dist[i]));
    EXPECT_LE(std::abs(hits[i] - kDraws * dist[i]), 3 * sigma) << "token " << i;
  }
}

TEST(SlidingPerplexity, UniformAndCertainScorers) {
  std::vector<TokenId> tokens(3000);
  for (std::size_t i = 0; i < tokens.size(); ++i) tokens[i] = static_cast<TokenId>(i % 4);
  EXPECT_NEAR(sliding_perplexity(UniformScorer(4.0), tokens), 4.0, 1e-9);
  EXPECT_NEAR(sliding_perplexity(UniformScorer(50257.0), tokens), 50257.0, 1e-9);
  EXPECT_EQ(sliding_perplexity(CertainScorer(), tokens), 1.0);
}

TEST(SlidingPerplexity, ShortSequenceEqualsDirect) {
  std::mt19937_64 rng(2);
  HistoryScorer scorer;
  for (std::size_t len : {1u, 17u, 512u, 1024u}) {
    std::vector<TokenId> tokens(len);
    for (auto& t : tokens) t = static_cast<TokenId>(rng() % 50);
    std::vector<double> terms;
    for (std::size_t j = 0; j < len; ++j)
      terms.push_back(-scorer.log_prob(std::span<const TokenId>(tokens).first(j), tokens[j]));
    EXPECT_EQ(sliding_perplexity(scorer, tokens), std::exp(oracle::compensated_sum(terms) / static_cast<double>(len)));
  }
}

TEST(SlidingPerplexity, SegmentsSeePrecedingStride) {
  HistoryScorer scorer;
  std::vector<TokenId> tokens(2500);
  for (std::size_t i = 0; i < tokens.size(); ++i) tokens[i] = static_cast<TokenId>((i * 7) % 13);
  const PerplexityConfig cfg{512, 1024};
  std::vector<double> terms;
  const std::span<const TokenId> all(tokens);
  for (std::size_t j = 0; j < tokens.size(); ++j) {
    const std::size_t seg = j / 1024 * 1024;
    const std::size_t ctx = seg >= 512 ? seg - 512 : 0;
    terms.push_back(-scorer.log_prob(all.subspan(ctx, j - ctx), tokens[j]));
  }
  const auto got = sliding_nll(scorer, tokens, cfg);
  EXPECT_EQ(got.tokens, tokens.size());
  EXPECT_EQ(got.sum, oracle::compensated_sum(terms));
}

TEST(SlidingPerplexity, StrideAboveMaxLen) {
  const std::vector<TokenId> tokens{0, 1};
  EXPECT_THROW(sliding_perplexity(UniformScorer(2), tokens, {2048, 1024}), Error);
}

TEST(Spearman, Basics) {
  const std::vector<double> x{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(*spearman(x, std::vector<double>{10, 20, 30, 40}), 1.0);
  EXPECT_DOUBLE_EQ(*spearman(x, std::vector<double>{4, 3, 2, 1}), -1.0);
  EXPECT_FALSE(spearman(x, std::vector<double>{1, 1, 1, 1}).has_value());
  // Ties get average ranks: y ranks are 1.5, 1.5, 3, 4.
  EXPECT_NEAR(*spearman(x, std::vector<double>{1, 1, 2, 3}), 0.9486832980505138, 1e-12);
}

TEST(TradeoffSweep, OneRowPerConfigAndDeterministic) {
  const auto corpus = synthetic_corpus(6000, 50, 9);
  const auto lm = NGramLM::train(corpus, 50, 3, 0.1);
  const auto held = NGramLM::train(synthetic_corpus(2000, 50, 10), 50, 3, 0.1);
  const auto index = SuffixIndex::build(corpus, Vocab::synthetic(50));
  const std::vector<TokenSeq> prompts{{1, 2, 3}, {4, 5}};
  const std::vector<DecodingConfig> one{DecodingConfig{}};
  SweepOptions opts;
  opts.length = 30;
  const auto r = tradeoff_sweep(lm, index, prompts, one, held, opts);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_TRUE(r.warnings.empty());
  EXPECT_GE(r.rows[0].dup_truncated, 1.0);
  EXPECT_LE(r.rows[0].dup_truncated, 5.0);
  EXPECT_GE(r.rows[0].dup_untruncated, r.rows[0].dup_truncated);

  std::vector<DecodingConfig> grid(3);
  grid[1].top_k = 5;
  grid[2].temperature = 1.5;
  opts.jobs = 3;
  const auto x = tradeoff_sweep(lm, index, prompts, grid, held, opts);
  opts.jobs = 1;
  const auto y = tradeoff_sweep(lm, index, prompts, grid, held, opts);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_EQ(x.rows[i].dup_truncated, y.rows[i].dup_truncated);
    EXPECT_EQ(x.rows[i].perplexity, y.rows[i].perplexity);
  }
}

TEST(TradeoffSweep, WarnsWhenEvaluatorSharesTrainingSplit) {
  const auto corpus = synthetic_corpus(3000, 30, 1);
  const auto lm = NGramLM::train(corpus, 30, 3, 0.1);
  const auto index = SuffixIndex::build(corpus, Vocab::synthetic(30));
  const std::vector<TokenSeq> prompts{{1}};
  const std::vector<DecodingConfig> grid{DecodingConfig{}};
  const auto r = tradeoff_sweep(lm, index, prompts, grid, lm, {10});
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_EQ(r.warnings[0].rfind("perplexity proxy contaminated", 0), 0u);
}

TEST(SyntheticCorpus, ShapeAndDeterminism) {
  const auto a = synthetic_corpus(50000, 200, 7);
  EXPECT_EQ(a.ids.size(), 50000u);
  EXPECT_EQ(a.num_docs(), 100u);
  EXPECT_EQ(a.ids, synthetic_corpus(50000, 200, 7).ids);
  EXPECT_NE(a.ids, synthetic_corpus(50000, 200, 8).ids);
  for (auto id : a.ids) ASSERT_LT(id, 200u);
}
