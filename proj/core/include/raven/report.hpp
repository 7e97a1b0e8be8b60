#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "raven/corpus.hpp"
#include "raven/error.hpp"

namespace raven::report {

std::string_view toolkit_version();

enum class Format { Csv, Json };
Format parse_format(std::string_view name);

using Cell = std::variant<std::monostate, std::string, std::int64_t, std::uint64_t, double>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct Header {
  std::string command;
  std::uint64_t config_hash = 0;
  std::optional<std::uint64_t> index_fingerprint;
  std::vector<std::pair<std::string, std::string>> notes;
};

std::string hex64(std::uint64_t v);
std::string format_cell(const Cell& c);  // CSV rendering; doubles use six decimals

// CSV: "# key: value" header lines, then a header row and data rows.
// JSON: one object with the header fields, "columns" and "rows".
void write_report(std::ostream& out, const Header& header, const Table& table, Format format);
// Writes to `path`, or to stdout when `path` is empty.
void write_report(const std::filesystem::path& path, const Header& header, const Table& table,
                  Format format);

// Reads a CSV written by write_report: '#' lines are skipped, the first
// remaining row is the header.
Table read_csv(std::istream& in);
Table read_csv(const std::filesystem::path& path);

// FNV-1a 64 over "key=value\n" lines in key order.
std::uint64_t config_hash(const std::map<std::string, std::string>& fields);
std::uint64_t file_hash(const std::filesystem::path& path);

// Draws `count` distinct (prompt, continuation) windows uniformly from the
// documents of `corpus`; a window never spans two documents.
std::vector<GenerationRecord> sample_prompts(const TokenCorpus& corpus, std::size_t count,
                                             std::size_t prompt_len, std::size_t continuation_len,
                                             std::uint64_t seed);

}  // namespace raven::report
