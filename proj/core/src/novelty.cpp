#include "raven/novelty.hpp"

#include <algorithm>
#include <numeric>

#include "raven/error.hpp"
#include "raven/parallel.hpp"

namespace raven {

namespace {

// Online suffix automaton over the prompt+continuation of one record. After
// appending symbol j, the suffix link of the newest state identifies the
// longest suffix of text[0..j] that also ends at an earlier position.
class ContextAutomaton {
 public:
  explicit ContextAutomaton(std::size_t capacity) {
    states_.reserve(2 * capacity + 1);
    states_.push_back({});
  }

  // Appends `c` and returns the length of the longest suffix of the text so
  // far that occurred earlier.
  std::uint32_t push(TokenId c) {
    const int cur = static_cast<int>(states_.size());
    states_.push_back({states_[last_].len + 1, -1, {}});
    int p = last_;
    while (p != -1 && !next(p, c)) {
      states_[p].edges.emplace_back(c, cur);
      p = states_[p].link;
    }
    if (p == -1) {
      states_[cur].link = 0;
    } else {
      const int q = *next(p, c);
      if (states_[p].len + 1 == states_[q].len) {
        states_[cur].link = q;
      } else {
        const int clone = static_cast<int>(states_.size());
        State copy = states_[q];
        copy.len = states_[p].len + 1;
        states_.push_back(std::move(copy));
        while (p != -1) {
          int* target = find_edge(p, c);
          if (target == nullptr || *target != q) break;
          *target = clone;
          p = states_[p].link;
        }
        states_[q].link = clone;
        states_[cur].link = clone;
      }
    }
    last_ = cur;
    return states_[states_[cur].link].len;
  }

 private:
  struct State {
    std::uint32_t len = 0;
    int link = -1;
    std::vector<std::pair<TokenId, int>> edges;
  };

  int* find_edge(int s, TokenId c) {
    for (auto& [sym, to] : states_[s].edges)
      if (sym == c) return &to;
    return nullptr;
  }
  std::optional<int> next(int s, TokenId c) const {
    for (const auto& [sym, to] : states_[s].edges)
      if (sym == c) return to;
    return std::nullopt;
  }

  std::vector<State> states_;
  int last_ = 0;
};

TokenSeq concat(const GenerationRecord& r) {
  TokenSeq all;
  all.reserve(r.prompt.size() + r.continuation.size());
  all.insert(all.end(), r.prompt.begin(), r.prompt.end());
  all.insert(all.end(), r.continuation.begin(), r.continuation.end());
  return all;
}

}  // namespace

const char* to_string(SourceMode mode) {
  switch (mode) {
    case SourceMode::TrainingAndContext: return "both";
    case SourceMode::TrainingOnly: return "train";
    case SourceMode::ContextOnly: return "context";
  }
  return "?";
}

SourceMode parse_source_mode(std::string_view name) {
  if (name == "both") return SourceMode::TrainingAndContext;
  if (name == "train") return SourceMode::TrainingOnly;
  if (name == "context") return SourceMode::ContextOnly;
  throw Error("unknown source mode: " + std::string(name));
}

std::uint32_t DuplicationLengths::longest(std::size_t t, SourceMode mode) const {
  switch (mode) {
    case SourceMode::TrainingOnly: return training[t];
    case SourceMode::ContextOnly: return context[t];
    case SourceMode::TrainingAndContext: return std::max(training[t], context[t]);
  }
  return 0;
}

DuplicationLengths duplication_lengths(const SuffixIndex& index, const GenerationRecord& record,
                                       const NoveltyOptions& opts) {
  const std::size_t plen = record.prompt.size();
  const std::size_t clen = record.continuation.size();
  DuplicationLengths out;
  out.training.resize(clen);
  out.context.resize(clen);
  out.window.resize(clen);
  if (clen == 0) return out;
  for (std::size_t t = 0; t < clen; ++t)
    out.window[t] = static_cast<std::uint32_t>(opts.ngrams_cross_prompt ? plen + t + 1 : t + 1);

  const TokenSeq all = concat(record);
  if (opts.ngrams_cross_prompt) {
    const auto ms = index.matching_stats(all);
    for (std::size_t t = 0; t < clen; ++t) out.training[t] = ms[plen + t];
  } else {
    const auto ms = index.matching_stats(record.continuation);
    std::copy(ms.begin(), ms.end(), out.training.begin());
  }

  ContextAutomaton sam(all.size());
  for (std::size_t j = 0; j < all.size(); ++j) {
    const std::uint32_t earlier = sam.push(all[j]);
    if (j >= plen) out.context[j - plen] = std::min(earlier, out.window[j - plen]);
  }
  return out;
}

bool is_duplicated(const SuffixIndex& index, const GenerationRecord& record, std::uint32_t n,
                   std::size_t t, SourceMode mode, const NoveltyOptions& opts) {
  if (n == 0) throw Error("n must be at least 1");
  if (t >= record.continuation.size()) throw Error("position outside continuation");
  const std::size_t window = opts.ngrams_cross_prompt ? record.prompt.size() + t + 1 : t + 1;
  if (n > window) throw Error("n-gram exceeds continuation prefix");

  const TokenSeq all = concat(record);
  const std::size_t start = record.prompt.size() + t + 1 - n;
  const std::span<const TokenId> gram(all.data() + start, n);

  if (mode != SourceMode::ContextOnly && index.contains(gram)) return true;
  if (mode != SourceMode::TrainingOnly) {
    for (std::size_t s = 0; s < start; ++s)
      if (std::equal(gram.begin(), gram.end(), all.begin() + static_cast<std::ptrdiff_t>(s)))
        return true;
  }
  return false;
}

NoveltyProfile novelty_profile(const SuffixIndex& index, std::span<const GenerationRecord> records,
                               std::uint32_t n_min, std::uint32_t n_max, SourceMode mode,
                               const NoveltyOptions& opts, unsigned jobs) {
  if (records.empty()) throw Error("no generation records");
  if (n_min < 1 || n_max < n_min) throw Error("invalid n range");
  const std::size_t span = n_max - n_min + 1;

  struct Counts {
    std::vector<std::uint64_t> total, novel;
  };
  std::vector<Counts> per_record(records.size());
  parallel_for(records.size(), jobs, [&](std::size_t i) {
    const auto& rec = records[i];
    Counts c{std::vector<std::uint64_t>(span), std::vector<std::uint64_t>(span)};
    if (!rec.continuation.empty()) {
      const auto dup = duplication_lengths(index, rec, opts);
      for (std::size_t t = 0; t < rec.continuation.size(); ++t) {
        const std::uint32_t longest = dup.longest(t, mode);
        const std::uint32_t top = std::min(dup.window[t], n_max);
        for (std::uint32_t n = n_min; n <= top; ++n) {
          ++c.total[n - n_min];
          if (n > longest) ++c.novel[n - n_min];
        }
      }
    }
    per_record[i] = std::move(c);
  });

  NoveltyProfile profile;
  profile.mode = mode;
  for (std::size_t k = 0; k < span; ++k) {
    NoveltyRow row;
    row.n = n_min + static_cast<std::uint32_t>(k);
    double macro_sum = 0.0;
    std::size_t macro_count = 0;
    for (const auto& c : per_record) {
      row.total += c.total[k];
      row.novel += c.novel[k];
      if (c.total[k] > 0) {
        macro_sum += static_cast<double>(c.novel[k]) / static_cast<double>(c.total[k]);
        ++macro_count;
      }
    }
    if (row.total > 0) row.fraction = static_cast<double>(row.novel) / static_cast<double>(row.total);
    if (macro_count > 0) row.macro_fraction = macro_sum / static_cast<double>(macro_count);
    profile.rows.push_back(row);
  }
  return profile;
}

double truncated_mean(std::span<const std::uint32_t> scores, std::uint32_t cap) {
  if (scores.empty()) return 0.0;
  double sum = 0.0;
  for (auto s : scores) sum += std::min(s, cap);
  return sum / static_cast<double>(scores.size());
}

DuplicationSeries pointwise_scores(const SuffixIndex& index, const GenerationRecord& record,
                                   SourceMode mode, std::uint32_t cap, const NoveltyOptions& opts) {
  if (record.continuation.empty()) throw Error("empty continuation");
  if (cap == 0) throw Error("cap must be positive");
  const auto dup = duplication_lengths(index, record, opts);
  DuplicationSeries series;
  series.cap = cap;
  series.scores.resize(record.continuation.size());
  for (std::size_t t = 0; t < series.scores.size(); ++t) series.scores[t] = 1 + dup.longest(t, mode);
  series.truncated_mean = truncated_mean(series.scores, cap);
  series.mean = truncated_mean(series.scores, kNoCap);
  return series;
}

std::vector<SupercopySpan> find_supercopies(const SuffixIndex& index, const GenerationRecord& record,
                                            std::uint32_t threshold) {
  if (threshold < 2) throw Error("supercopy threshold must be at least 2");
  std::vector<SupercopySpan> spans;
  if (record.continuation.empty()) return spans;
  const std::span<const TokenId> cont(record.continuation);
  const auto fwd = index.forward_matches(cont);
  for (std::size_t s = 0; s < fwd.size(); ++s) {
    // Right-maximal by construction; left-maximal unless the span starting one
    // earlier covers it.
    if (fwd[s] < threshold || (s > 0 && fwd[s - 1] > fwd[s])) continue;
    SupercopySpan span;
    span.start = s;
    span.length = fwd[s];
    span.train_occurrences = index.count(cont.subspan(s, span.length));
    if (span.length >= kLeadGramLength)
      span.lead_100gram_occurrences = index.count(cont.subspan(s, kLeadGramLength));
    spans.push_back(span);
  }
  return spans;
}

PositionProfile position_profile(const SuffixIndex& index, std::span<const GenerationRecord> records,
                                 SourceMode mode, std::size_t bin_width, std::uint32_t cap,
                                 const NoveltyOptions& opts, unsigned jobs) {
  if (bin_width == 0) throw Error("bin width must be positive");
  if (cap == 0) throw Error("cap must be positive");
  const bool long_enough = std::any_of(records.begin(), records.end(), [&](const auto& r) {
    return r.continuation.size() >= 2 * bin_width;
  });
  if (!long_enough) throw Error("insufficient length for position profile");

  std::vector<std::vector<std::uint32_t>> scores(records.size());
  parallel_for(records.size(), jobs, [&](std::size_t i) {
    if (records[i].continuation.size() > bin_width)
      scores[i] = pointwise_scores(index, records[i], mode, cap, opts).scores;
  });

  std::vector<double> sums;
  std::vector<std::uint64_t> counts;
  for (const auto& s : scores) {
    for (std::size_t t = bin_width; t < s.size(); ++t) {
      const std::size_t b = t / bin_width - 1;
      if (b >= sums.size()) {
        sums.resize(b + 1, 0.0);
        counts.resize(b + 1, 0);
      }
      sums[b] += std::min(s[t], cap);
      ++counts[b];
    }
  }

  PositionProfile profile;
  profile.bin_width = bin_width;
  profile.cap = cap;
  for (std::size_t b = 0; b < sums.size(); ++b) {
    PositionBin bin;
    bin.begin = (b + 1) * bin_width;
    bin.end = bin.begin + bin_width;
    bin.tokens = counts[b];
    bin.mean = sums[b] / static_cast<double>(counts[b]);
    profile.bins.push_back(bin);
  }
  return profile;
}

std::vector<bool> unigram_novelty(const SuffixIndex& index, std::span<const TokenId> tokens) {
  std::vector<bool> novel(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) novel[i] = !index.contains(tokens.subspan(i, 1));
  return novel;
}

}  // namespace raven
