#include "raven/index.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "raven/error.hpp"
#include "raven/suffix_sort.hpp"

namespace raven {

namespace {

constexpr char kMagic[6] = {'R', 'V', 'N', 'I', 'X', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kFlagCrossDoc = 1u;

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    T out{};
    for (std::size_t i = 0; i < sizeof(T); ++i)
      out |= static_cast<T>((v >> (8 * i)) & 0xFF) << (8 * (sizeof(T) - 1 - i));
    return out;
  }
  return v;
}

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  template <class T>
  void scalar(T v) {
    v = to_little(v);
    out_.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  void array(std::span<const std::uint32_t> a) {
    if constexpr (std::endian::native == std::endian::little) {
      out_.write(reinterpret_cast<const char*>(a.data()),
                 static_cast<std::streamsize>(a.size_bytes()));
    } else {
      for (auto v : a) scalar(v);
    }
  }
  void bytes(const char* p, std::size_t n) { out_.write(p, static_cast<std::streamsize>(n)); }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <class T>
  T scalar() {
    T v{};
    bytes(reinterpret_cast<char*>(&v), sizeof v);
    return to_little(v);
  }
  void array(std::vector<std::uint32_t>& a, std::uint64_t n) {
    // Grow in chunks so a corrupt length field cannot force a huge allocation.
    constexpr std::uint64_t kChunk = 1u << 20;
    a.clear();
    while (a.size() < n) {
      const std::size_t old = a.size();
      const std::size_t add = static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, n - old));
      a.resize(old + add);
      bytes(reinterpret_cast<char*>(a.data() + old), add * sizeof(std::uint32_t));
    }
    if constexpr (std::endian::native == std::endian::big)
      for (auto& v : a) v = to_little(v);
  }
  void bytes(char* p, std::size_t n) {
    in_.read(p, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw Error("corrupt index");
  }

 private:
  std::istream& in_;
};

constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

class FnvStream : public std::streambuf {
 public:
  std::uint64_t hash = kFnvOffset;

 protected:
  int_type overflow(int_type ch) override {
    if (ch != traits_type::eof()) mix(static_cast<unsigned char>(ch));
    return ch;
  }
  std::streamsize xsputn(const char* s, std::streamsize n) override {
    for (std::streamsize i = 0; i < n; ++i) mix(static_cast<unsigned char>(s[i]));
    return n;
  }

 private:
  void mix(unsigned char c) {
    hash ^= c;
    hash *= kFnvPrime;
  }
};

}  // namespace

SuffixIndex SuffixIndex::build(const TokenCorpus& corpus, Vocab vocab, bool allow_cross_doc) {
  if (corpus.ids.empty() || corpus.doc_starts.empty()) throw Error("empty corpus");
  if (corpus.doc_starts.front() != 0) throw Error("first document must start at offset 0");
  if (!std::is_sorted(corpus.doc_starts.begin(), corpus.doc_starts.end()) ||
      std::adjacent_find(corpus.doc_starts.begin(), corpus.doc_starts.end()) !=
          corpus.doc_starts.end() ||
      corpus.doc_starts.back() >= corpus.ids.size())
    throw Error("document offsets must be strictly increasing with a nonempty last document");

  SuffixIndex idx;
  idx.allow_cross_doc_ = allow_cross_doc;
  const std::uint64_t docs = corpus.doc_starts.size();
  const std::uint64_t sentinels = allow_cross_doc ? 1 : docs;
  const std::uint64_t length = corpus.ids.size() + sentinels;
  const std::uint64_t alphabet = vocab.size() + sentinels;
  if (corpus.ids.size() > kMaxCorpusTokens || length >= 0xFFFFFFFFull || alphabet >= 0xFFFFFFFFull)
    throw Error("corpus exceeds 32-bit token limit");
  idx.num_docs_ = static_cast<std::uint32_t>(docs);

  const auto shift = static_cast<std::uint32_t>(sentinels);
  idx.text_.reserve(length);
  for (std::size_t d = 0; d < docs; ++d) {
    for (TokenId id : corpus.document(d)) {
      if (id >= vocab.size()) throw Error("token id outside vocabulary");
      idx.text_.push_back(id + shift);
    }
    if (!allow_cross_doc) idx.text_.push_back(static_cast<std::uint32_t>(docs - 1 - d));
  }
  if (allow_cross_doc) idx.text_.push_back(0);

  idx.sa_.resize(idx.text_.size());
  suffix_sort(idx.text_, idx.sa_, static_cast<std::uint32_t>(alphabet));
  idx.vocab_ = std::move(vocab);
  return idx;
}

SuffixIndex::Range SuffixIndex::extend(Range r, std::uint32_t depth, TokenId token) const {
  if (r.empty() || token >= vocab_.size()) return {r.lo, r.lo};
  const std::uint32_t sym = token + sentinels();
  const std::size_t n = text_.size();
  // Symbol following the shared prefix; suffixes that end before depth sort first.
  auto next = [&](std::uint32_t row) -> std::int64_t {
    const std::size_t pos = static_cast<std::size_t>(sa_[row]) + depth;
    return pos < n ? static_cast<std::int64_t>(text_[pos]) : -1;
  };
  std::uint32_t lo = r.lo, hi = r.hi;
  while (lo < hi) {
    const std::uint32_t mid = lo + (hi - lo) / 2;
    if (next(mid) < sym) lo = mid + 1;
    else hi = mid;
  }
  const std::uint32_t first = lo;
  hi = r.hi;
  while (lo < hi) {
    const std::uint32_t mid = lo + (hi - lo) / 2;
    if (next(mid) <= sym) lo = mid + 1;
    else hi = mid;
  }
  return {first, lo};
}

SuffixIndex::Range SuffixIndex::locate(std::span<const TokenId> query) const {
  Range r = full_range();
  for (std::size_t i = 0; i < query.size() && !r.empty(); ++i)
    r = extend(r, static_cast<std::uint32_t>(i), query[i]);
  return r;
}

bool SuffixIndex::contains(std::span<const TokenId> query) const {
  if (query.empty()) throw Error("empty query");
  return !locate(query).empty();
}

std::uint64_t SuffixIndex::count(std::span<const TokenId> query) const {
  if (query.empty()) throw Error("empty query");
  return locate(query).size();
}

std::vector<std::uint32_t> SuffixIndex::forward_matches(std::span<const TokenId> stream) const {
  if (stream.empty()) throw Error("empty stream");
  std::vector<std::uint32_t> out(stream.size());
  std::uint32_t carried = 0;
  for (std::size_t s = 0; s < stream.size(); ++s) {
    // stream[s..s+carried) is a suffix of the previous match, hence present.
    Range r = locate(stream.subspan(s, carried));
    std::uint32_t len = carried;
    while (s + len < stream.size()) {
      Range next = extend(r, len, stream[s + len]);
      if (next.empty()) break;
      r = next;
      ++len;
    }
    out[s] = len;
    carried = len > 0 ? len - 1 : 0;
  }
  return out;
}

std::vector<std::uint32_t> SuffixIndex::matching_stats(std::span<const TokenId> stream) const {
  const auto fwd = forward_matches(stream);
  // s + fwd[s] is non-decreasing, so the earliest start covering t only moves right.
  std::vector<std::uint32_t> out(stream.size());
  std::size_t s = 0;
  for (std::size_t t = 0; t < stream.size(); ++t) {
    while (s <= t && s + fwd[s] <= t) ++s;
    out[t] = s <= t ? static_cast<std::uint32_t>(t - s + 1) : 0;
  }
  return out;
}

void SuffixIndex::save(std::ostream& out) const {
  Writer w(out);
  w.bytes(kMagic, sizeof kMagic);
  w.scalar<std::uint32_t>(kVersion);
  w.scalar<std::uint32_t>(allow_cross_doc_ ? kFlagCrossDoc : 0u);
  w.scalar<std::uint32_t>(static_cast<std::uint32_t>(vocab_.size()));
  w.scalar<std::uint32_t>(num_docs_);
  w.scalar<std::uint64_t>(text_.size());
  w.array(text_);
  w.array(sa_);
  for (const auto& tok : vocab_.tokens()) {
    w.scalar<std::uint32_t>(static_cast<std::uint32_t>(tok.size()));
    w.bytes(tok.data(), tok.size());
  }
}

void SuffixIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  save(out);
  out.flush();
  if (!out) throw Error("cannot write " + path.string());
}

SuffixIndex SuffixIndex::load(std::istream& in) {
  Reader r(in);
  char magic[sizeof kMagic];
  in.read(magic, sizeof magic);
  if (static_cast<std::size_t>(in.gcount()) != sizeof magic ||
      std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw Error("incompatible index file");
  if (r.scalar<std::uint32_t>() != kVersion) throw Error("incompatible index file");

  SuffixIndex idx;
  const auto flags = r.scalar<std::uint32_t>();
  if (flags & ~kFlagCrossDoc) throw Error("incompatible index file");
  idx.allow_cross_doc_ = (flags & kFlagCrossDoc) != 0;
  const auto vocab_size = r.scalar<std::uint32_t>();
  idx.num_docs_ = r.scalar<std::uint32_t>();
  const auto length = r.scalar<std::uint64_t>();
  if (idx.num_docs_ == 0 || length <= idx.sentinels() || length >= 0xFFFFFFFFull)
    throw Error("corrupt index");
  r.array(idx.text_, length);
  r.array(idx.sa_, length);

  std::vector<std::string> tokens;
  tokens.reserve(std::min<std::uint32_t>(vocab_size, 1u << 20));
  for (std::uint32_t i = 0; i < vocab_size; ++i) {
    const auto len = r.scalar<std::uint32_t>();
    if (len == 0 || len > (1u << 20)) throw Error("corrupt index");
    std::string tok(len, '\0');
    r.bytes(tok.data(), len);
    tokens.push_back(std::move(tok));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw Error("corrupt index");
  try {
    idx.vocab_ = Vocab::from_tokens(std::move(tokens));
  } catch (const Error&) {
    throw Error("corrupt index");
  }

  const std::uint64_t alphabet = static_cast<std::uint64_t>(vocab_size) + idx.sentinels();
  std::vector<bool> seen(length);
  for (std::uint64_t i = 0; i < length; ++i) {
    if (idx.text_[i] >= alphabet || idx.sa_[i] >= length || seen[idx.sa_[i]])
      throw Error("corrupt index");
    seen[idx.sa_[i]] = true;
  }
  return idx;
}

SuffixIndex SuffixIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("index not found");
  return load(in);
}

std::uint64_t SuffixIndex::fingerprint() const {
  FnvStream buf;
  std::ostream os(&buf);
  save(os);
  return buf.hash;
}

}  // namespace raven
