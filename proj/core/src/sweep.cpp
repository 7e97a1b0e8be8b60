#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "raven/error.hpp"
#include "raven/lab.hpp"
#include "raven/novelty.hpp"
#include "raven/parallel.hpp"

namespace raven::lab {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("spearman: length mismatch");
  if (x.size() < 2) return std::nullopt;
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

SweepResult tradeoff_sweep(const NGramLM& generator, const SuffixIndex& index,
                           std::span<const TokenSeq> prompts, std::span<const DecodingConfig> grid,
                           const NGramLM& evaluator, const SweepOptions& opts) {
  if (grid.empty()) throw Error("empty decoding grid");
  if (prompts.empty()) throw Error("no prompts");
  SweepResult result;
  if (generator.training_fingerprint() == evaluator.training_fingerprint())
    result.warnings.emplace_back("perplexity proxy contaminated: evaluator was trained on the generator's split");

  result.rows.resize(grid.size());
  parallel_for(grid.size(), opts.jobs, [&](std::size_t g) {
    const DecodingConfig& cfg = grid[g];
    double trunc_sum = 0.0, plain_sum = 0.0;
    std::size_t scored = 0;
    NllTotal nll;
    for (std::size_t i = 0; i < prompts.size(); ++i) {
      DecodingConfig per_prompt = cfg;
      per_prompt.seed = splitmix(cfg.seed ^ splitmix(i));
      const auto rec = sample_continuation(generator, prompts[i], opts.length, per_prompt);
      const auto series = pointwise_scores(index, rec, SourceMode::TrainingAndContext, opts.cap);
      for (auto s : series.scores) {
        trunc_sum += std::min(s, opts.cap);
        plain_sum += s;
      }
      scored += series.scores.size();
      const auto part = sliding_nll(evaluator, rec.continuation, opts.perplexity);
      nll.sum += part.sum;
      nll.tokens += part.tokens;
    }
    SweepRow& row = result.rows[g];
    row.config = cfg;
    row.dup_truncated = trunc_sum / static_cast<double>(scored);
    row.dup_untruncated = plain_sum / static_cast<double>(scored);
    row.perplexity = std::exp(nll.sum / static_cast<double>(nll.tokens));
  });
  return result;
}

TokenCorpus synthetic_corpus(std::size_t tokens, std::size_t vocab_size, std::uint64_t seed,
                             std::size_t doc_length) {
  if (tokens == 0 || vocab_size < 2 || doc_length == 0) throw Error("invalid synthetic corpus shape");
  // Zipf(1.1) cumulative weights over the vocabulary.
  std::vector<double> cdf(vocab_size);
  double acc = 0.0;
  for (std::size_t i = 0; i < vocab_size; ++i) {
    acc += 1.0 / std::pow(static_cast<double>(i + 1), 1.1);
    cdf[i] = acc;
  }
  auto zipf = [&](std::mt19937_64& rng) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * acc;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return static_cast<TokenId>(std::min<std::size_t>(it - cdf.begin(), vocab_size - 1));
  };

  std::mt19937_64 rng(splitmix(seed));
  std::vector<TokenSeq> docs;
  TokenSeq doc;
  TokenId a = zipf(rng), b = zipf(rng);
  for (std::size_t i = 0; i < tokens; ++i) {
    // Each (a, b) context owns a small fixed successor set derived from a hash.
    std::mt19937_64 ctx(splitmix(seed ^ (static_cast<std::uint64_t>(a) << 32 | b)));
    const std::size_t fanout = 2 + ctx() % 6;
    std::vector<TokenId> succ(fanout);
    for (auto& s : succ) s = zipf(ctx);
    double total = 0.0;
    for (std::size_t j = 0; j < fanout; ++j) total += 1.0 / static_cast<double>(j + 1);
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * total;
    TokenId next = succ.back();
    for (std::size_t j = 0; j < fanout; ++j) {
      u -= 1.0 / static_cast<double>(j + 1);
      if (u < 0.0) {
        next = succ[j];
        break;
      }
    }
    // Occasional resets keep the chain from settling into a short cycle.
    if (rng() % 50 == 0) next = zipf(rng);
    doc.push_back(next);
    a = b;
    b = next;
    if (doc.size() == doc_length) docs.push_back(std::exchange(doc, {}));
  }
  if (!doc.empty()) docs.push_back(std::move(doc));
  return TokenCorpus::from_documents(docs);
}

}  // namespace raven::lab
