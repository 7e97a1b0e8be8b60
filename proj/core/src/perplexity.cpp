#include <algorithm>
#include <cmath>

#include "raven/error.hpp"
#include "raven/lab.hpp"

namespace raven::lab {

NllTotal sliding_nll(const TokenScorer& scorer, std::span<const TokenId> tokens,
                     const PerplexityConfig& cfg) {
  if (cfg.stride == 0 || cfg.max_len == 0) throw Error("stride and max_len must be positive");
  if (cfg.stride > cfg.max_len) throw Error("stride exceeds max_len");
  if (tokens.empty()) throw Error("no tokens to score");

  // Neumaier summation: long sequences of similar terms otherwise drift by
  // many ulps, which exp() then amplifies by the perplexity itself.
  NllTotal total;
  double carry = 0.0;
  for (std::size_t begin = 0; begin < tokens.size(); begin += cfg.max_len) {
    const std::size_t end = std::min(begin + cfg.max_len, tokens.size());
    const std::size_t context = begin >= cfg.stride ? begin - cfg.stride : 0;
    for (std::size_t j = begin; j < end; ++j) {
      const double term = -scorer.log_prob(tokens.subspan(context, j - context), tokens[j]);
      const double next = total.sum + term;
      carry += std::abs(total.sum) >= std::abs(term) ? (total.sum - next) + term : (term - next) + total.sum;
      total.sum = next;
      ++total.tokens;
    }
  }
  total.sum += carry;
  return total;
}

double sliding_perplexity(const TokenScorer& scorer, std::span<const TokenId> tokens,
                          const PerplexityConfig& cfg) {
  const NllTotal t = sliding_nll(scorer, tokens, cfg);
  return std::exp(t.sum / static_cast<double>(t.tokens));
}

}  // namespace raven::lab
