#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "raven/error.hpp"
#include "raven/lab.hpp"

namespace raven::lab {

namespace {

std::u32string context_key(std::span<const TokenId> ctx) {
  std::u32string key(ctx.size(), U'\0');
  for (std::size_t i = 0; i < ctx.size(); ++i) key[i] = static_cast<char32_t>(ctx[i]);
  return key;
}

std::uint64_t corpus_fingerprint(const TokenCorpus& corpus) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xFF;
      h *= 1099511628211ull;
    }
  };
  mix(corpus.ids.size());
  for (auto id : corpus.ids) mix(id);
  for (auto s : corpus.doc_starts) mix(s);
  return h;
}

}  // namespace

NGramLM NGramLM::train(const TokenCorpus& corpus, std::size_t vocab_size, unsigned order, double alpha) {
  if (!(alpha > 0.0)) throw Error("smoothing constant alpha must be positive");
  if (order < 1) throw Error("n-gram order must be at least 1");
  if (corpus.ids.empty()) throw Error("empty corpus");
  if (vocab_size == 0) throw Error("empty vocabulary");

  NGramLM lm;
  lm.order_ = order;
  lm.vocab_size_ = vocab_size;
  lm.alpha_ = alpha;
  lm.fingerprint_ = corpus_fingerprint(corpus);
  lm.tables_.resize(order - 1);

  using Counter = std::unordered_map<TokenId, std::uint32_t>;
  std::unordered_map<TokenId, std::uint32_t> unigram;
  std::vector<std::unordered_map<std::u32string, Counter>> raw(order - 1);

  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    const auto doc = corpus.document(d);
    for (std::size_t i = 0; i < doc.size(); ++i) {
      if (doc[i] >= vocab_size) throw Error("token id outside vocabulary");
      ++unigram[doc[i]];
      for (std::size_t c = 1; c < order && c <= i; ++c)
        ++raw[c - 1][context_key(doc.subspan(i - c, c))][doc[i]];
    }
  }

  auto freeze = [](const Counter& counter) {
    Successors s;
    s.counts.assign(counter.begin(), counter.end());
    std::sort(s.counts.begin(), s.counts.end());
    for (const auto& [id, n] : s.counts) s.total += n;
    return s;
  };
  lm.unigram_ = freeze(unigram);
  for (std::size_t c = 0; c + 1 < order; ++c) {
    lm.tables_[c].reserve(raw[c].size());
    for (auto& [key, counter] : raw[c]) lm.tables_[c].emplace(key, freeze(counter));
  }
  return lm;
}

const NGramLM::Successors& NGramLM::lookup(std::span<const TokenId> history) const {
  const std::size_t longest = std::min<std::size_t>(order_ - 1, history.size());
  for (std::size_t c = longest; c >= 1; --c) {
    const auto& table = tables_[c - 1];
    auto it = table.find(context_key(history.last(c)));
    if (it != table.end() && it->second.total > 0) return it->second;
  }
  return unigram_;
}

double NGramLM::prob(std::span<const TokenId> history, TokenId next) const {
  const Successors& s = lookup(history);
  std::uint32_t count = 0;
  auto it = std::lower_bound(s.counts.begin(), s.counts.end(), next,
                             [](const auto& entry, TokenId id) { return entry.first < id; });
  if (it != s.counts.end() && it->first == next) count = it->second;
  return (count + alpha_) / (static_cast<double>(s.total) + alpha_ * static_cast<double>(vocab_size_));
}

double NGramLM::log_prob(std::span<const TokenId> history, TokenId next) const {
  return std::log(prob(history, next));
}

void NGramLM::distribution(std::span<const TokenId> history, std::vector<double>& out) const {
  const Successors& s = lookup(history);
  const double denom = static_cast<double>(s.total) + alpha_ * static_cast<double>(vocab_size_);
  out.assign(vocab_size_, alpha_ / denom);
  for (const auto& [id, n] : s.counts) out[id] = (n + alpha_) / denom;
}

}  // namespace raven::lab
