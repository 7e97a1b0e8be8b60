#include "raven/corpus.hpp"

#include <fstream>
#include <istream>

#include "json.hpp"
#include "raven/error.hpp"

namespace raven {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

}  // namespace

TokenId Vocab::add(std::string_view token) {
  if (auto it = lookup_.find(token); it != lookup_.end()) return it->second;
  if (tokens_.size() >= kMaxCorpusTokens) throw Error("vocabulary exceeds 32-bit id space");
  const auto id = static_cast<TokenId>(tokens_.size());
  tokens_.emplace_back(token);
  lookup_.emplace(tokens_.back(), id);
  return id;
}

std::optional<TokenId> Vocab::find(std::string_view token) const {
  if (auto it = lookup_.find(token); it != lookup_.end()) return it->second;
  return std::nullopt;
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
  Vocab v;
  for (const auto& t : tokens) {
    if (v.find(t)) throw Error("duplicate vocabulary entry: " + t);
    v.add(t);
  }
  return v;
}

Vocab Vocab::synthetic(std::size_t size) {
  Vocab v;
  for (std::size_t i = 0; i < size; ++i) v.add("t" + std::to_string(i));
  return v;
}

std::span<const TokenId> TokenCorpus::document(std::size_t d) const {
  const std::size_t begin = doc_starts.at(d);
  const std::size_t end = d + 1 < doc_starts.size() ? doc_starts[d + 1] : ids.size();
  return std::span<const TokenId>(ids).subspan(begin, end - begin);
}

TokenCorpus TokenCorpus::from_documents(const std::vector<TokenSeq>& docs) {
  TokenCorpus c;
  for (const auto& d : docs) {
    if (d.empty()) continue;
    c.doc_starts.push_back(c.ids.size());
    c.ids.insert(c.ids.end(), d.begin(), d.end());
  }
  return c;
}

std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<Document> read_documents(std::istream& in, DocSeparator sep) {
  std::vector<Document> docs;
  Document current;
  std::string line;
  while (std::getline(in, line)) {
    auto tokens = split_tokens(line);
    if (sep == DocSeparator::Line) {
      if (!tokens.empty()) docs.push_back(std::move(tokens));
      continue;
    }
    if (tokens.empty()) {
      if (!current.empty()) docs.push_back(std::move(current));
      current.clear();
    } else {
      current.insert(current.end(), std::make_move_iterator(tokens.begin()),
                     std::make_move_iterator(tokens.end()));
    }
  }
  if (!current.empty()) docs.push_back(std::move(current));
  return docs;
}

std::vector<Document> read_documents(const std::filesystem::path& path, DocSeparator sep) {
  auto in = open_input(path);
  return read_documents(in, sep);
}

Vocab build_vocab(std::span<const Document> documents) {
  Vocab v;
  for (const auto& doc : documents)
    for (const auto& tok : doc) v.add(tok);
  if (v.empty()) throw Error("empty corpus");
  return v;
}

TokenCorpus encode_corpus(std::span<const Document> documents, const Vocab& vocab) {
  TokenCorpus c;
  for (const auto& doc : documents) {
    if (doc.empty()) continue;
    c.doc_starts.push_back(c.ids.size());
    for (const auto& tok : doc) {
      auto id = vocab.find(tok);
      if (!id) throw Error("unknown token: " + tok);
      c.ids.push_back(*id);
    }
    if (c.ids.size() > kMaxCorpusTokens) throw Error("corpus exceeds 32-bit token limit");
  }
  return c;
}

TokenCorpus read_corpus(std::istream& in, DocSeparator sep, Vocab& vocab) {
  TokenCorpus c;
  bool open_doc = false;
  std::string line;
  while (std::getline(in, line)) {
    const auto tokens = split_tokens(line);
    if (tokens.empty()) {
      open_doc = false;
      continue;
    }
    if (sep == DocSeparator::Line || !open_doc) c.doc_starts.push_back(c.ids.size());
    open_doc = true;
    for (const auto& tok : tokens) c.ids.push_back(vocab.add(tok));
    if (c.ids.size() > kMaxCorpusTokens) throw Error("corpus exceeds 32-bit token limit");
  }
  if (c.ids.empty()) throw Error("empty corpus");
  return c;
}

TokenCorpus read_corpus(const std::filesystem::path& path, DocSeparator sep, Vocab& vocab) {
  auto in = open_input(path);
  return read_corpus(in, sep, vocab);
}

std::vector<std::string> decode(std::span<const TokenId> ids, const Vocab& vocab) {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (auto id : ids) out.push_back(vocab.token(id));
  return out;
}

TokenId OovTable::encode(std::string_view token) {
  if (auto id = vocab_->find(token)) return *id;
  const std::uint64_t id = vocab_->size() + static_cast<std::uint64_t>(unseen_.add(token));
  if (id > kMaxCorpusTokens) throw Error("token id space exhausted");
  return static_cast<TokenId>(id);
}

TokenSeq OovTable::encode_all(std::span<const std::string> tokens) {
  TokenSeq out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(encode(t));
  return out;
}

std::string OovTable::spell(TokenId id) const {
  if (id < vocab_->size()) return vocab_->token(id);
  const std::size_t k = id - vocab_->size();
  if (k < unseen_.size()) return unseen_.token(static_cast<TokenId>(k));
  return "<oov:" + std::to_string(id) + ">";
}

std::string OovTable::join(std::span<const TokenId> ids) const {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out.push_back(' ');
    out += spell(ids[i]);
  }
  return out;
}

namespace {

GenerationSet read_jsonl(std::istream& in, const Vocab& vocab, bool require_continuation) {
  GenerationSet set{{}, OovTable(vocab)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (split_tokens(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw Error("malformed generation at line " + std::to_string(line_no));
    }
    auto field = [&](const char* name, bool required) -> std::string {
      if (!obj.is_object()) throw Error("malformed generation at line " + std::to_string(line_no));
      auto it = obj.find(name);
      if (it == obj.end()) {
        if (!required) return {};
        throw Error("missing field \"" + std::string(name) + "\" at line " + std::to_string(line_no));
      }
      if (!it->is_string())
        throw Error("field \"" + std::string(name) + "\" is not a string at line " +
                    std::to_string(line_no));
      return it->get<std::string>();
    };
    GenerationRecord rec;
    rec.id = field("id", true);
    rec.prompt = set.oov.encode_all(split_tokens(field("prompt", false)));
    rec.continuation = set.oov.encode_all(split_tokens(field("continuation", require_continuation)));
    if (require_continuation && rec.continuation.empty())
      throw Error("empty continuation at line " + std::to_string(line_no));
    set.records.push_back(std::move(rec));
  }
  return set;
}

}  // namespace

GenerationSet load_generations(std::istream& in, const Vocab& vocab) {
  return read_jsonl(in, vocab, true);
}

GenerationSet load_generations(const std::filesystem::path& path, const Vocab& vocab) {
  auto in = open_input(path);
  return read_jsonl(in, vocab, true);
}

GenerationSet load_prompts(const std::filesystem::path& path, const Vocab& vocab) {
  auto in = open_input(path);
  return read_jsonl(in, vocab, false);
}

}  // namespace raven
