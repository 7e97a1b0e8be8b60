#include <algorithm>

#include "raven/error.hpp"
#include "raven/novelty.hpp"

namespace raven {

namespace {

std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

bool member(const std::vector<std::string>& set, const std::string& tok) {
  return std::find(set.begin(), set.end(), tok) != set.end();
}

}  // namespace

std::optional<double> QuoteStats::p_novel() const { return ratio(novel, tokens); }
std::optional<double> QuoteStats::p_quotes() const { return ratio(in_quotes, tokens); }
std::optional<double> QuoteStats::p_novel_given_quotes() const {
  return ratio(novel_in_quotes, in_quotes);
}
std::optional<double> QuoteStats::p_quotes_given_novel() const {
  return ratio(novel_in_quotes, novel);
}

QuoteStats quote_statistics(std::span<const std::vector<std::string>> sequences,
                            std::span<const std::vector<bool>> novel, const QuoteConfig& config) {
  if (sequences.size() != novel.size()) throw Error("novelty flags do not match sequences");
  QuoteStats stats;
  for (std::size_t r = 0; r < sequences.size(); ++r) {
    const auto& toks = sequences[r];
    const auto& flags = novel[r];
    if (toks.size() != flags.size()) throw Error("novelty flags do not match sequence length");

    auto is_quote = [&](std::size_t i) {
      return member(config.openers, toks[i]) || member(config.closers, toks[i]);
    };

    // Mark tokens strictly inside a matched opener/closer pair. Pairs are
    // matched greedily left to right; an opener with no closer after it is
    // dropped along with everything that follows it.
    std::vector<bool> quoted(toks.size(), false);
    std::size_t i = 0;
    while (i < toks.size()) {
      if (!member(config.openers, toks[i])) {
        ++i;
        continue;
      }
      std::size_t j = i + 1;
      while (j < toks.size() && !member(config.closers, toks[j])) ++j;
      if (j == toks.size()) {
        ++stats.unmatched_openers;
        stats.warnings.push_back("unmatched opening quote in record " + std::to_string(r) +
                                 " at token " + std::to_string(i));
        break;
      }
      for (std::size_t k = i + 1; k < j; ++k) quoted[k] = true;
      i = j + 1;
    }

    for (std::size_t k = 0; k < toks.size(); ++k) {
      if (is_quote(k)) continue;
      ++stats.tokens;
      if (flags[k]) ++stats.novel;
      if (quoted[k]) ++stats.in_quotes;
      if (flags[k] && quoted[k]) ++stats.novel_in_quotes;
    }
  }
  return stats;
}

}  // namespace raven
