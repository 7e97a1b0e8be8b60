#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace raven {

using TokenId = std::uint32_t;
using TokenSeq = std::vector<TokenId>;

// One document as a sequence of whitespace-free token strings.
using Document = std::vector<std::string>;

// Corpora at or above this many tokens are rejected; ids and suffix-array
// entries are 32-bit.
inline constexpr std::uint64_t kMaxCorpusTokens = 0xFFFFFFFFull - 2;

struct TransparentStringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
};

// Bijection between token strings and dense ids assigned in insertion order.
class Vocab {
 public:
  Vocab() = default;

  // Returns the id of `token`, inserting it if it is new.
  TokenId add(std::string_view token);
  std::optional<TokenId> find(std::string_view token) const;
  const std::string& token(TokenId id) const { return tokens_.at(id); }

  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  static Vocab from_tokens(std::vector<std::string> tokens);
  // Placeholder names "t0", "t1", ... for corpora built directly from ids.
  static Vocab synthetic(std::size_t size);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId, TransparentStringHash, std::equal_to<>> lookup_;
};

struct TokenCorpus {
  TokenSeq ids;
  std::vector<std::size_t> doc_starts;

  std::size_t num_docs() const noexcept { return doc_starts.size(); }
  std::span<const TokenId> document(std::size_t d) const;

  // Builds a corpus from per-document id sequences; empty documents are skipped.
  static TokenCorpus from_documents(const std::vector<TokenSeq>& docs);
};

enum class DocSeparator { Line, Blank };

std::vector<Document> read_documents(std::istream& in, DocSeparator sep);
std::vector<Document> read_documents(const std::filesystem::path& path, DocSeparator sep);
std::vector<std::string> split_tokens(std::string_view text);

Vocab build_vocab(std::span<const Document> documents);

// Streams a corpus straight to ids, growing `vocab` in first-occurrence order.
// Equivalent to read_documents + build_vocab + encode_corpus without holding
// every token string in memory.
TokenCorpus read_corpus(std::istream& in, DocSeparator sep, Vocab& vocab);
TokenCorpus read_corpus(const std::filesystem::path& path, DocSeparator sep, Vocab& vocab);
TokenCorpus encode_corpus(std::span<const Document> documents, const Vocab& vocab);
std::vector<std::string> decode(std::span<const TokenId> ids, const Vocab& vocab);

struct GenerationRecord {
  std::string id;
  TokenSeq prompt;
  TokenSeq continuation;
};

// Out-of-vocabulary tokens seen while encoding generations. Each distinct
// unseen string gets a fresh id at or above the training vocabulary size, so
// unseen words never match training text or each other.
class OovTable {
 public:
  explicit OovTable(const Vocab& vocab) : vocab_(&vocab) {}

  TokenId encode(std::string_view token);
  TokenSeq encode_all(std::span<const std::string> tokens);
  std::string spell(TokenId id) const;
  std::string join(std::span<const TokenId> ids) const;

  std::size_t base() const noexcept { return vocab_->size(); }
  const std::vector<std::string>& unseen() const noexcept { return unseen_.tokens(); }

 private:
  const Vocab* vocab_;
  Vocab unseen_;
};

struct GenerationSet {
  std::vector<GenerationRecord> records;
  OovTable oov;
};

// Reads the JSONL generations format: one object per line with string fields
// "id", "prompt" (may be empty) and "continuation" (non-empty). Blank lines
// are skipped.
GenerationSet load_generations(std::istream& in, const Vocab& vocab);
GenerationSet load_generations(const std::filesystem::path& path, const Vocab& vocab);

// Same format, but only prompts matter; continuation may be absent or empty.
GenerationSet load_prompts(const std::filesystem::path& path, const Vocab& vocab);

}  // namespace raven
