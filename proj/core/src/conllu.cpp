#include <charconv>
#include <fstream>
#include <istream>

#include "raven/error.hpp"
#include "raven/syntax.hpp"

namespace raven::syntax {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    cols.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return cols;
}

bool parse_uint(std::string_view s, std::uint32_t& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

void validate_heads(const std::vector<DepRow>& rows, std::size_t sentence) {
  const std::size_t n = rows.size();
  for (const auto& r : rows)
    if (r.head > n) throw Error("invalid head in sentence " + std::to_string(sentence));
  // Walk each word up to ROOT; a walk longer than n steps means a cycle.
  for (std::size_t w = 1; w <= n; ++w) {
    std::size_t cur = w;
    for (std::size_t steps = 0; cur != 0; ++steps) {
      if (steps > n) throw Error("cyclic heads in sentence " + std::to_string(sentence));
      cur = rows[cur - 1].head;
    }
  }
}

}  // namespace

std::vector<SentenceParse> read_conllu(std::istream& in) {
  std::vector<SentenceParse> out;
  std::vector<DepRow> rows;
  std::string line;
  std::size_t line_no = 0;

  auto flush = [&] {
    if (rows.empty()) return;
    validate_heads(rows, out.size());
    SentenceParse s;
    for (const auto& r : rows) s.words.push_back(r.form);
    s.dependency = std::move(rows);
    out.push_back(std::move(s));
    rows.clear();
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) {
      flush();
      continue;
    }
    if (line[0] == '#') continue;
    const auto cols = split_tabs(line);
    if (cols.size() != 10) throw Error("malformed CoNLL-U row at line " + std::to_string(line_no));
    // Multiword token ranges and empty nodes carry no dependency of their own.
    if (cols[0].find_first_of("-.") != std::string_view::npos) continue;
    std::uint32_t id = 0;
    DepRow row;
    if (!parse_uint(cols[0], id) || id != rows.size() + 1)
      throw Error("unexpected word id at line " + std::to_string(line_no));
    if (!parse_uint(cols[6], row.head)) throw Error("invalid head at line " + std::to_string(line_no));
    row.form = cols[1];
    row.upos = cols[3];
    row.xpos = cols[4];
    row.deprel = cols[7];
    rows.push_back(std::move(row));
  }
  flush();
  return out;
}

ParseFormat format_for_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".conllu" || ext == ".conll" || ext == ".conllx") return ParseFormat::Conllu;
  return ParseFormat::Brackets;
}

std::vector<SentenceParse> load_parses(const std::filesystem::path& path, ParseFormat format) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return format == ParseFormat::Conllu ? read_conllu(in) : read_brackets(in);
}

}  // namespace raven::syntax
