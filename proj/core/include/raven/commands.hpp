#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "raven/corpus.hpp"
#include "raven/error.hpp"
#include "raven/lab.hpp"
#include "raven/novelty.hpp"
#include "raven/report.hpp"
#include "raven/syntax.hpp"

namespace raven::commands {

// Raised for a missing index file; the CLI maps it to exit code 2.
class NotFound : public Error {
 public:
  using Error::Error;
};

struct IndexBuildOptions {
  std::filesystem::path corpus;
  std::filesystem::path out;
  DocSeparator separator = DocSeparator::Line;
  bool allow_cross_doc = false;
};
void index_build(const IndexBuildOptions& opts, std::ostream& log);

struct PromptSampleOptions {
  std::filesystem::path corpus;
  DocSeparator separator = DocSeparator::Line;
  std::size_t count = 1000;
  std::size_t prompt_len = 512;
  std::size_t continuation_len = 1000;
  std::uint64_t seed = 0;
  std::filesystem::path out;  // JSONL; stdout when empty
};
void prompts_sample(const PromptSampleOptions& opts, std::ostream& log);

enum class Analysis { Ngram, Supercopy, Positions, Quotes };
const char* to_string(Analysis a);

// Configuration of one n-gram-level analysis run. Defaults follow the
// standard experiment: n in 1..10, truncation at 5, supercopies of 100+
// tokens, position bins of 100 truncated at 10.
struct RunConfig {
  Analysis analysis = Analysis::Ngram;
  std::filesystem::path index;
  std::filesystem::path generations;
  SourceMode mode = SourceMode::TrainingAndContext;
  std::uint32_t n_min = 1;
  std::uint32_t n_max = 10;
  std::uint32_t cap = 5;
  std::uint32_t threshold = kSupercopyThreshold;
  std::size_t bin_width = 100;
  bool ngrams_cross_prompt = false;
  std::string prompt_length_tag;  // free-form label, e.g. "512"
  QuoteConfig quotes{};
  std::filesystem::path out;
  std::filesystem::path per_record_out;  // optional per-record duplication table
  report::Format format = report::Format::Csv;
  unsigned jobs = 1;

  // Fields that change results, rendered for hashing.
  std::map<std::string, std::string> semantic_fields() const;
};
void run(const RunConfig& config, std::ostream& log);

struct SyntaxOptions {
  std::vector<std::string> kinds;  // kind names, or "all"
  std::vector<std::filesystem::path> train_parses;
  std::vector<std::filesystem::path> gen_parses;
  std::optional<syntax::Granularity> granularity;
  bool type_level = false;
  syntax::ExtractOptions extract{};
  std::filesystem::path out;
  std::filesystem::path novel_out;
  report::Format format = report::Format::Csv;
};
void run_syntax(const SyntaxOptions& opts, std::ostream& log);

struct SweepCommandOptions {
  std::filesystem::path corpus;
  std::filesystem::path eval_corpus;  // held-out split; carved from corpus when empty
  DocSeparator separator = DocSeparator::Line;
  unsigned order = 3;
  double alpha = 0.1;
  std::filesystem::path grid;
  std::filesystem::path prompts;
  std::size_t length = 100;
  std::uint32_t cap = 5;
  std::size_t stride = 512;
  std::size_t max_len = 1024;
  std::filesystem::path out;
  std::filesystem::path plot_script;
  report::Format format = report::Format::Csv;
  unsigned jobs = 1;
};
void run_sweep(const SweepCommandOptions& opts, std::ostream& log);

struct ProbeFormsOptions {
  std::filesystem::path index;
  std::filesystem::path forms;
  std::filesystem::path out;
  report::Format format = report::Format::Csv;
};
void probe_forms(const ProbeFormsOptions& opts, std::ostream& log);

struct ProbeCvcOptions {
  std::filesystem::path index;
  std::filesystem::path exclude;
  std::filesystem::path out;
  report::Format format = report::Format::Csv;
};
void probe_cvc(const ProbeCvcOptions& opts, std::ostream& log);

struct CompareOptions {
  std::filesystem::path left;
  std::filesystem::path right;
  std::string key = "n";
  std::string left_label = "baseline";
  std::string right_label = "model";
  std::filesystem::path out;
};
void compare(const CompareOptions& opts, std::ostream& log);

// Reads decoding configs from a JSON array of {top_k, top_p, temperature, seed}
// objects; top_k may be null or "inf" for no truncation.
std::vector<lab::DecodingConfig> read_grid(const std::filesystem::path& path);

}  // namespace raven::commands
