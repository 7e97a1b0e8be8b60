#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "raven/commands.hpp"

namespace cmd = raven::commands;

namespace {

const std::map<std::string, raven::DocSeparator> kSeparators{{"line", raven::DocSeparator::Line},
                                                             {"blank", raven::DocSeparator::Blank}};
const std::map<std::string, raven::report::Format> kFormats{{"csv", raven::report::Format::Csv},
                                                            {"json", raven::report::Format::Json}};
const std::map<std::string, raven::SourceMode> kModes{{"both", raven::SourceMode::TrainingAndContext},
                                                      {"train", raven::SourceMode::TrainingOnly},
                                                      {"context", raven::SourceMode::ContextOnly}};

void add_format(CLI::App* app, raven::report::Format& format) {
  app->add_option("--format", format, "Output format: csv or json")
      ->transform(CLI::CheckedTransformer(kFormats, CLI::ignore_case).description(""))
      ->type_name("csv|json")
      ->default_str("csv");
}

void add_separator(CLI::App* app, raven::DocSeparator& sep) {
  app->add_option("--doc-sep", sep, "Document separator: one per line, or blank-line blocks")
      ->transform(CLI::CheckedTransformer(kSeparators, CLI::ignore_case).description(""))
      ->type_name("line|blank")
      ->default_str("line");
}

void add_jobs(CLI::App* app, unsigned& jobs) {
  app->add_option("--jobs,-j", jobs, "Worker threads for per-record analyses (RAVEN_JOBS overrides)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

// Options shared by ngram, supercopy, positions and quotes.
void add_run_options(CLI::App* app, cmd::RunConfig& cfg, bool with_mode) {
  app->add_option("--index", cfg.index, "Index file from `raven index build`")->required();
  app->add_option("--generations", cfg.generations, "JSONL with id, prompt, continuation")->required();
  if (with_mode)
    app->add_option("--mode", cfg.mode, "Duplication source: both, train or context")
        ->transform(CLI::CheckedTransformer(kModes, CLI::ignore_case).description(""))
        ->type_name("both|train|context")
        ->default_str(raven::to_string(cfg.mode));
  app->add_flag("--ngrams-cross-prompt", cfg.ngrams_cross_prompt,
                "Let n-grams ending in the continuation reach back into the prompt");
  app->add_option("--prompt-length", cfg.prompt_length_tag, "Label recorded in the report header");
  app->add_option("--out,-o", cfg.out, "Report path (stdout when omitted)");
  add_format(app, cfg.format);
  add_jobs(app, cfg.jobs);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"raven: novelty and duplication analysis of generated text against a training corpus"};
  app.set_version_flag("--version", std::string(raven::report::toolkit_version()));
  app.require_subcommand(1);

  // index build
  cmd::IndexBuildOptions index_opts;
  auto* index = app.add_subcommand("index", "Suffix-array index over a training corpus");
  index->require_subcommand(1);
  auto* index_build = index->add_subcommand("build", "Build an index file from a tokenized corpus");
  index_build->add_option("--corpus", index_opts.corpus, "Whitespace-tokenized UTF-8 corpus")->required();
  index_build->add_option("--out,-o", index_opts.out, "Index file to write")->required();
  add_separator(index_build, index_opts.separator);
  index_build->add_flag("--allow-cross-doc", index_opts.allow_cross_doc,
                        "Let matches span document boundaries");

  // prompts sample
  cmd::PromptSampleOptions prompt_opts;
  auto* prompts = app.add_subcommand("prompts", "Prompt sampling from a test corpus");
  prompts->require_subcommand(1);
  auto* sample = prompts->add_subcommand("sample", "Sample distinct (prompt, continuation) windows as JSONL");
  sample->add_option("--corpus", prompt_opts.corpus, "Whitespace-tokenized UTF-8 corpus")->required();
  add_separator(sample, prompt_opts.separator);
  sample->add_option("--count", prompt_opts.count, "Number of windows")->capture_default_str();
  sample->add_option("--prompt-len", prompt_opts.prompt_len, "Prompt tokens")->capture_default_str();
  sample->add_option("--continuation-len", prompt_opts.continuation_len, "Continuation tokens")
      ->capture_default_str();
  sample->add_option("--seed", prompt_opts.seed, "Random seed")->capture_default_str();
  sample->add_option("--out,-o", prompt_opts.out, "JSONL output (stdout when omitted)");

  // ngram / supercopy / positions / quotes
  cmd::RunConfig ngram_cfg;
  ngram_cfg.analysis = cmd::Analysis::Ngram;
  auto* ngram = app.add_subcommand("ngram", "Novel n-gram fractions and mean pointwise duplication");
  add_run_options(ngram, ngram_cfg, true);
  ngram->add_option("--nmin", ngram_cfg.n_min, "Smallest n")->check(CLI::PositiveNumber)->capture_default_str();
  ngram->add_option("--nmax", ngram_cfg.n_max, "Largest n")->check(CLI::PositiveNumber)->capture_default_str();
  ngram->add_option("--cap", ngram_cfg.cap, "Truncation cap for the mean pointwise score")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ngram->add_option("--per-record-out", ngram_cfg.per_record_out, "Optional per-record duplication table");

  cmd::RunConfig super_cfg;
  super_cfg.analysis = cmd::Analysis::Supercopy;
  super_cfg.mode = raven::SourceMode::TrainingOnly;
  auto* supercopy = app.add_subcommand("supercopy", "Maximal spans copied verbatim from training");
  add_run_options(supercopy, super_cfg, false);
  supercopy->add_option("--threshold", super_cfg.threshold, "Minimum copied span length")
      ->check(CLI::Range(2u, std::numeric_limits<std::uint32_t>::max()))
      ->capture_default_str();

  cmd::RunConfig pos_cfg;
  pos_cfg.analysis = cmd::Analysis::Positions;
  pos_cfg.mode = raven::SourceMode::TrainingOnly;
  pos_cfg.cap = 10;
  auto* positions = app.add_subcommand("positions", "Mean truncated duplication score by continuation position");
  add_run_options(positions, pos_cfg, true);
  positions->add_option("--bin", pos_cfg.bin_width, "Bin width in tokens")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  positions->add_option("--cap", pos_cfg.cap, "Truncation cap")->check(CLI::PositiveNumber)->capture_default_str();

  cmd::RunConfig quote_cfg;
  quote_cfg.analysis = cmd::Analysis::Quotes;
  quote_cfg.mode = raven::SourceMode::TrainingOnly;
  auto* quotes = app.add_subcommand("quotes", "Novel unigram rates inside and outside quotation marks");
  add_run_options(quotes, quote_cfg, false);
  quotes->add_option("--openers", quote_cfg.quotes.openers, "Opening quote tokens")->capture_default_str();
  quotes->add_option("--closers", quote_cfg.quotes.closers, "Closing quote tokens")->capture_default_str();

  // syntax
  cmd::SyntaxOptions syn_opts;
  std::string granularity;
  auto* syn = app.add_subcommand("syntax", "Novelty of syntactic structures (CoNLL-U or bracketed trees)");
  syn->add_option("--kind", syn_opts.kinds,
                  "Structure kinds: posseq, parse, deparc, deprole, cfgrule, wordpos, argstruct, or all")
      ->required();
  syn->add_option("--train-parses", syn_opts.train_parses, "Training parses (.conllu or bracketed trees)")
      ->required();
  syn->add_option("--gen-parses", syn_opts.gen_parses, "Generated-text parses")->required();
  syn->add_option("--granularity", granularity, "sentence or instance (default depends on kind)")
      ->check(CLI::IsMember({"sentence", "instance"}));
  syn->add_flag("--type-level", syn_opts.type_level, "Count distinct novel structures instead of instances");
  syn->add_flag("--lowercase", syn_opts.extract.lowercase, "Lowercase word forms before matching");
  syn->add_flag("--exclude-root", syn_opts.extract.exclude_root, "Drop arcs headed by the root");
  syn->add_flag("--exclude-punct", syn_opts.extract.exclude_punct, "Drop punct arcs");
  syn->add_flag("--collapse-noun-tags", syn_opts.extract.collapse_noun_tags,
                "Map NN, NNS, NNP, NNPS to NOUN for wordpos");
  syn->add_option("--core-relations", syn_opts.extract.core_relations, "Relations kept by argstruct")
      ->capture_default_str();
  syn->add_option("--out,-o", syn_opts.out, "Report path (stdout when omitted)");
  syn->add_option("--novel-out", syn_opts.novel_out, "Optional listing of every novel structure");
  add_format(syn, syn_opts.format);

  // lab sweep
  cmd::SweepCommandOptions sweep_opts;
  auto* lab = app.add_subcommand("lab", "Decoding laboratory with n-gram language models");
  lab->require_subcommand(1);
  auto* sweep = lab->add_subcommand("sweep", "Duplication vs. perplexity across decoding configs");
  sweep->add_option("--corpus", sweep_opts.corpus, "Training corpus for the generator and index")->required();
  sweep->add_option("--eval-corpus", sweep_opts.eval_corpus,
                    "Held-out corpus for the perplexity model (default: last fifth of --corpus)");
  add_separator(sweep, sweep_opts.separator);
  sweep->add_option("--order", sweep_opts.order, "n-gram order")->check(CLI::PositiveNumber)->capture_default_str();
  sweep->add_option("--alpha", sweep_opts.alpha, "Additive smoothing")->capture_default_str();
  sweep->add_option("--grid", sweep_opts.grid, "JSON list of {top_k, top_p, temperature, seed}")->required();
  sweep->add_option("--prompts", sweep_opts.prompts, "JSONL prompts")->required();
  sweep->add_option("--length", sweep_opts.length, "Continuation tokens per prompt")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sweep->add_option("--cap", sweep_opts.cap, "Truncation cap")->check(CLI::PositiveNumber)->capture_default_str();
  sweep->add_option("--stride", sweep_opts.stride, "Perplexity context stride")->capture_default_str();
  sweep->add_option("--max-len", sweep_opts.max_len, "Perplexity segment length")->capture_default_str();
  sweep->add_option("--out,-o", sweep_opts.out, "Report path (stdout when omitted)");
  sweep->add_option("--plot-script", sweep_opts.plot_script, "Also write a gnuplot script");
  add_format(sweep, sweep_opts.format);
  add_jobs(sweep, sweep_opts.jobs);

  // probe forms | cvc
  cmd::ProbeFormsOptions forms_opts;
  cmd::ProbeCvcOptions cvc_opts;
  auto* probe = app.add_subcommand("probe", "Lexical presence probes");
  probe->require_subcommand(1);
  auto* forms = probe->add_subcommand("forms", "Training counts of a list of word forms");
  forms->add_option("--index", forms_opts.index, "Index file")->required();
  forms->add_option("--forms", forms_opts.forms, "One form per line")->required();
  forms->add_option("--out,-o", forms_opts.out, "Report path (stdout when omitted)");
  add_format(forms, forms_opts.format);
  auto* cvc = probe->add_subcommand("cvc", "Presence of synthetic CVC nouns and their plurals");
  cvc->add_option("--index", cvc_opts.index, "Index file")->required();
  cvc->add_option("--exclude", cvc_opts.exclude, "Word list of real words to drop");
  cvc->add_option("--out,-o", cvc_opts.out, "Report path (stdout when omitted)");
  add_format(cvc, cvc_opts.format);

  // compare
  cmd::CompareOptions cmp_opts;
  auto* compare = app.add_subcommand("compare", "Join two CSV reports on a key column");
  compare->add_option("left", cmp_opts.left, "Baseline report")->required();
  compare->add_option("right", cmp_opts.right, "Model report")->required();
  compare->add_option("--key", cmp_opts.key, "Join column")->capture_default_str();
  compare->add_option("--left-label", cmp_opts.left_label, "Suffix for left columns")->capture_default_str();
  compare->add_option("--right-label", cmp_opts.right_label, "Suffix for right columns")->capture_default_str();
  compare->add_option("--out,-o", cmp_opts.out, "Output path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "raven: " << e.what() << " (see --help)\n";
    return 1;
  }

  if (const char* env = std::getenv("RAVEN_JOBS")) {
    try {
      const unsigned long jobs = std::stoul(env);
      if (jobs == 0) throw std::invalid_argument("zero");
      for (unsigned* j : {&ngram_cfg.jobs, &super_cfg.jobs, &pos_cfg.jobs, &quote_cfg.jobs, &sweep_opts.jobs})
        *j = static_cast<unsigned>(jobs);
    } catch (const std::exception&) {
      std::cerr << "raven: RAVEN_JOBS must be a positive integer\n";
      return 1;
    }
  }
  if (!granularity.empty())
    syn_opts.granularity =
        granularity == "sentence" ? raven::syntax::Granularity::Sentence : raven::syntax::Granularity::Instance;

  try {
    if (*index_build) cmd::index_build(index_opts, std::cerr);
    else if (*sample) cmd::prompts_sample(prompt_opts, std::cerr);
    else if (*ngram) cmd::run(ngram_cfg, std::cerr);
    else if (*supercopy) cmd::run(super_cfg, std::cerr);
    else if (*positions) cmd::run(pos_cfg, std::cerr);
    else if (*quotes) cmd::run(quote_cfg, std::cerr);
    else if (*syn) cmd::run_syntax(syn_opts, std::cerr);
    else if (*sweep) cmd::run_sweep(sweep_opts, std::cerr);
    else if (*forms) cmd::probe_forms(forms_opts, std::cerr);
    else if (*cvc) cmd::probe_cvc(cvc_opts, std::cerr);
    else if (*compare) cmd::compare(cmp_opts, std::cerr);
  } catch (const cmd::NotFound& e) {
    std::cerr << "raven: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "raven: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
