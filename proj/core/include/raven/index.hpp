#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "raven/corpus.hpp"

namespace raven {

// Suffix-array index over a training corpus.
//
// The stored text is the corpus with every token id shifted up by the number
// of sentinels. Without cross-document matching each document is terminated by
// its own sentinel (documents are numbered in reverse so the final sentinel is
// 0, the unique smallest symbol), so no query can match across a boundary.
// With cross-document matching the documents are concatenated and a single
// sentinel 0 terminates the text.
//
// Immutable after construction; all queries are const and safe to call from
// any number of threads.
class SuffixIndex {
 public:
  // Half-open range of suffix-array rows sharing a common prefix.
  struct Range {
    std::uint32_t lo = 0;
    std::uint32_t hi = 0;
    bool empty() const noexcept { return lo >= hi; }
    std::uint32_t size() const noexcept { return hi - lo; }
  };

  SuffixIndex() = default;

  static SuffixIndex build(const TokenCorpus& corpus, Vocab vocab, bool allow_cross_doc = false);

  bool contains(std::span<const TokenId> query) const;
  std::uint64_t count(std::span<const TokenId> query) const;

  // out[t] is the length of the longest suffix of stream[0..t] that occurs in
  // the corpus.
  std::vector<std::uint32_t> matching_stats(std::span<const TokenId> stream) const;

  // out[s] is the length of the longest prefix of stream[s..] that occurs in
  // the corpus.
  std::vector<std::uint32_t> forward_matches(std::span<const TokenId> stream) const;

  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static SuffixIndex load(std::istream& in);
  static SuffixIndex load(const std::filesystem::path& path);

  const Vocab& vocab() const noexcept { return vocab_; }
  bool allow_cross_doc() const noexcept { return allow_cross_doc_; }
  std::uint32_t num_docs() const noexcept { return num_docs_; }
  // Number of corpus tokens, excluding sentinels.
  std::uint64_t num_tokens() const noexcept { return text_.size() - sentinels(); }
  std::span<const std::uint32_t> suffix_array() const noexcept { return sa_; }

  // FNV-1a 64 over the serialized representation; identifies the index in
  // report headers.
  std::uint64_t fingerprint() const;

 private:
  std::uint32_t sentinels() const noexcept { return allow_cross_doc_ ? 1u : num_docs_; }
  Range full_range() const noexcept { return {0, static_cast<std::uint32_t>(sa_.size())}; }
  // Narrows `r` (all rows share a prefix of length `depth`) to rows whose next
  // symbol equals the query token.
  Range extend(Range r, std::uint32_t depth, TokenId token) const;
  Range locate(std::span<const TokenId> query) const;

  Vocab vocab_;
  bool allow_cross_doc_ = false;
  std::uint32_t num_docs_ = 0;
  std::vector<std::uint32_t> text_;
  std::vector<std::uint32_t> sa_;
};

}  // namespace raven
