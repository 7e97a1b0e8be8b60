#include "raven/report.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace raven::report {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

void fnv(std::uint64_t& h, std::string_view bytes) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

nlohmann::json to_json(const Cell& c) {
  return std::visit(
      [](const auto& v) -> nlohmann::json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) return nullptr;
        else return v;
      },
      c);
}

// Splits one CSV record; quoted fields may not span lines.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  cells.push_back(std::move(cur));
  return cells;
}

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  // Rejection sampling keeps draws unbiased and platform independent.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do x = rng();
  while (x >= limit);
  return x % n;
}

}  // namespace

std::string_view toolkit_version() {
#ifdef RAVEN_VERSION
  return RAVEN_VERSION;
#else
  return "0.0.0";
#endif
}

Format parse_format(std::string_view name) {
  if (name == "csv") return Format::Csv;
  if (name == "json") return Format::Json;
  throw Error("unknown output format: " + std::string(name));
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

std::string format_cell(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return {};
        } else if constexpr (std::is_same_v<T, std::string>) {
          return v;
        } else if constexpr (std::is_same_v<T, double>) {
          char buf[64];
          std::snprintf(buf, sizeof buf, "%.6f", v);
          return buf;
        } else {
          return std::to_string(v);
        }
      },
      c);
}

void write_report(std::ostream& out, const Header& header, const Table& table, Format format) {
  if (format == Format::Json) {
    nlohmann::ordered_json j;
    j["raven_version"] = toolkit_version();
    j["command"] = header.command;
    j["config_hash"] = hex64(header.config_hash);
    if (header.index_fingerprint) j["index_fingerprint"] = hex64(*header.index_fingerprint);
    auto notes = nlohmann::ordered_json::object();
    for (const auto& [k, v] : header.notes) notes[k] = v;
    j["notes"] = notes;
    j["columns"] = table.columns;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
      auto obj = nlohmann::ordered_json::object();
      for (std::size_t i = 0; i < table.columns.size() && i < row.size(); ++i)
        obj[table.columns[i]] = to_json(row[i]);
      rows.push_back(std::move(obj));
    }
    j["rows"] = std::move(rows);
    out << j.dump(2) << '\n';
    return;
  }

  out << "# raven " << toolkit_version() << '\n';
  out << "# command: " << header.command << '\n';
  out << "# config_hash: " << hex64(header.config_hash) << '\n';
  if (header.index_fingerprint) out << "# index_fingerprint: " << hex64(*header.index_fingerprint) << '\n';
  for (const auto& [k, v] : header.notes) out << "# " << k << ": " << v << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i)
    out << (i ? "," : "") << csv_escape(table.columns[i]);
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_escape(format_cell(row[i]));
    out << '\n';
  }
}

void write_report(const std::filesystem::path& path, const Header& header, const Table& table,
                  Format format) {
  if (path.empty()) {
    write_report(std::cout, header, table, format);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  write_report(out, header, table, format);
  if (!out) throw Error("cannot write " + path.string());
}

Table read_csv(std::istream& in) {
  Table t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto cells = split_csv_line(line);
    if (!have_header) {
      t.columns = std::move(cells);
      have_header = true;
      continue;
    }
    std::vector<Cell> row;
    for (auto& c : cells) row.emplace_back(std::move(c));
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw Error("CSV has no header row");
  return t;
}

Table read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_csv(in);
}

std::uint64_t config_hash(const std::map<std::string, std::string>& fields) {
  std::uint64_t h = kFnvOffset;
  for (const auto& [k, v] : fields) {
    fnv(h, k);
    fnv(h, "=");
    fnv(h, v);
    fnv(h, "\n");
  }
  return h;
}

std::uint64_t file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::uint64_t h = kFnvOffset;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    fnv(h, std::string_view(buf, static_cast<std::size_t>(in.gcount())));
  }
  return h;
}

std::vector<GenerationRecord> sample_prompts(const TokenCorpus& corpus, std::size_t count,
                                             std::size_t prompt_len, std::size_t continuation_len,
                                             std::uint64_t seed) {
  if (continuation_len == 0) throw Error("continuation length must be at least 1");
  const std::size_t window = prompt_len + continuation_len;

  // Feasible window starts, numbered densely across documents.
  std::vector<std::size_t> doc_of;     // documents with at least one window
  std::vector<std::uint64_t> prefix{0};
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    const std::size_t len = corpus.document(d).size();
    if (len < window) continue;
    doc_of.push_back(d);
    prefix.push_back(prefix.back() + (len - window + 1));
  }
  const std::uint64_t feasible = prefix.back();
  if (feasible == 0) throw Error("corpus too short for the requested prompt and continuation lengths");
  if (count > feasible) throw Error("cannot sample distinct prompts");

  // Lazy Fisher-Yates over [0, feasible): only displaced slots are stored.
  std::mt19937_64 rng(seed);
  std::unordered_map<std::uint64_t, std::uint64_t> displaced;
  auto slot = [&](std::uint64_t i) {
    auto it = displaced.find(i);
    return it == displaced.end() ? i : it->second;
  };

  std::vector<GenerationRecord> out;
  std::unordered_set<std::u32string> seen;
  for (std::uint64_t i = 0; i < feasible && out.size() < count; ++i) {
    const std::uint64_t j = i + bounded(rng, feasible - i);
    const std::uint64_t pick = slot(j);
    displaced[j] = slot(i);

    const auto k = static_cast<std::size_t>(std::upper_bound(prefix.begin(), prefix.end(), pick) - prefix.begin() - 1);
    const auto doc = corpus.document(doc_of[k]);
    const auto w = doc.subspan(static_cast<std::size_t>(pick - prefix[k]), window);
    std::u32string key(w.begin(), w.end());
    if (!seen.insert(std::move(key)).second) continue;

    GenerationRecord rec;
    rec.id = "p" + std::to_string(out.size());
    rec.prompt.assign(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(prompt_len));
    rec.continuation.assign(w.begin() + static_cast<std::ptrdiff_t>(prompt_len), w.end());
    out.push_back(std::move(rec));
  }
  if (out.size() < count) throw Error("cannot sample distinct prompts");
  return out;
}

}  // namespace raven::report
