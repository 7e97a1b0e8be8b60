#include "raven/commands.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "raven/index.hpp"
#include "raven/lab.hpp"
#include "raven/parallel.hpp"
#include "raven/probes.hpp"

namespace raven::commands {

namespace {

using report::Cell;
using report::Header;
using report::Table;

SuffixIndex load_index(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw NotFound("index not found");
  return SuffixIndex::load(path);
}

void require_file(const std::filesystem::path& path, const char* what) {
  if (!std::filesystem::exists(path)) throw Error(std::string(what) + " not found: " + path.string());
}

Cell optional_cell(const std::optional<double>& v) { return v ? Cell(*v) : Cell(); }

std::string fmt6(double v) { return report::format_cell(Cell(v)); }

std::string join(const std::vector<std::string>& items, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
      line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    lines.push_back(line.substr(first));
  }
  return lines;
}

// Pooled pointwise duplication over every continuation token.
struct PointwiseSummary {
  double truncated = 0.0;
  double untruncated = 0.0;
  std::vector<DuplicationSeries> per_record;
};

PointwiseSummary summarize_pointwise(const SuffixIndex& index, std::span<const GenerationRecord> records,
                                     SourceMode mode, std::uint32_t cap, const NoveltyOptions& opts,
                                     unsigned jobs) {
  PointwiseSummary s;
  s.per_record.resize(records.size());
  parallel_for(records.size(), jobs, [&](std::size_t i) {
    s.per_record[i] = pointwise_scores(index, records[i], mode, cap, opts);
  });
  double trunc = 0.0, plain = 0.0;
  std::size_t tokens = 0;
  for (const auto& series : s.per_record) {
    for (auto v : series.scores) {
      trunc += std::min(v, cap);
      plain += v;
    }
    tokens += series.scores.size();
  }
  if (tokens > 0) {
    s.truncated = trunc / static_cast<double>(tokens);
    s.untruncated = plain / static_cast<double>(tokens);
  }
  return s;
}

std::vector<syntax::SentenceParse> load_parse_set(const std::vector<std::filesystem::path>& paths) {
  std::vector<syntax::SentenceParse> deps, trees;
  for (const auto& p : paths) {
    require_file(p, "parse file");
    const auto format = syntax::format_for_path(p);
    auto parses = syntax::load_parses(p, format);
    auto& dst = format == syntax::ParseFormat::Conllu ? deps : trees;
    dst.insert(dst.end(), std::make_move_iterator(parses.begin()), std::make_move_iterator(parses.end()));
  }
  if (!deps.empty() && !trees.empty()) return syntax::merge_parses(std::move(deps), std::move(trees));
  return deps.empty() ? trees : deps;
}

std::string hash_files(const std::vector<std::filesystem::path>& paths) {
  std::vector<std::string> parts;
  for (const auto& p : paths) parts.push_back(report::hex64(report::file_hash(p)));
  return join(parts, "+");
}

}  // namespace

const char* to_string(Analysis a) {
  switch (a) {
    case Analysis::Ngram: return "ngram";
    case Analysis::Supercopy: return "supercopy";
    case Analysis::Positions: return "positions";
    case Analysis::Quotes: return "quotes";
  }
  return "?";
}

void index_build(const IndexBuildOptions& opts, std::ostream& log) {
  require_file(opts.corpus, "corpus");
  Vocab vocab;
  const auto corpus = read_corpus(opts.corpus, opts.separator, vocab);
  const auto types = vocab.size();
  const auto index = SuffixIndex::build(corpus, std::move(vocab), opts.allow_cross_doc);
  index.save(opts.out);
  log << "indexed " << corpus.ids.size() << " tokens in " << corpus.num_docs() << " documents ("
      << types << " types) -> " << opts.out.string() << '\n';
}

void prompts_sample(const PromptSampleOptions& opts, std::ostream& log) {
  require_file(opts.corpus, "corpus");
  Vocab vocab;
  const auto corpus = read_corpus(opts.corpus, opts.separator, vocab);
  const auto records =
      report::sample_prompts(corpus, opts.count, opts.prompt_len, opts.continuation_len, opts.seed);

  std::ofstream file;
  if (!opts.out.empty()) {
    file.open(opts.out, std::ios::binary | std::ios::trunc);
    if (!file) throw Error("cannot write " + opts.out.string());
  }
  std::ostream& out = opts.out.empty() ? std::cout : file;
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["prompt"] = join(decode(r.prompt, vocab), " ");
    j["continuation"] = join(decode(r.continuation, vocab), " ");
    out << j.dump() << '\n';
  }
  log << "sampled " << records.size() << " prompts\n";
}

std::map<std::string, std::string> RunConfig::semantic_fields() const {
  std::map<std::string, std::string> f;
  f["analysis"] = to_string(analysis);
  f["mode"] = raven::to_string(mode);
  f["ngrams_cross_prompt"] = ngrams_cross_prompt ? "1" : "0";
  f["prompt_length"] = prompt_length_tag;
  switch (analysis) {
    case Analysis::Ngram:
      f["n_min"] = std::to_string(n_min);
      f["n_max"] = std::to_string(n_max);
      f["cap"] = std::to_string(cap);
      break;
    case Analysis::Supercopy:
      f["threshold"] = std::to_string(threshold);
      break;
    case Analysis::Positions:
      f["bin_width"] = std::to_string(bin_width);
      f["cap"] = std::to_string(cap);
      break;
    case Analysis::Quotes:
      f["openers"] = join(quotes.openers, " ");
      f["closers"] = join(quotes.closers, " ");
      break;
  }
  return f;
}

void run(const RunConfig& config, std::ostream& log) {
  const auto index = load_index(config.index);
  require_file(config.generations, "generations file");
  const auto gens = load_generations(config.generations, index.vocab());
  if (gens.records.empty()) throw Error("no generation records");
  const NoveltyOptions nopts{config.ngrams_cross_prompt};

  Header header;
  header.command = to_string(config.analysis);
  header.index_fingerprint = index.fingerprint();
  auto fields = config.semantic_fields();
  fields["index"] = report::hex64(*header.index_fingerprint);
  fields["generations"] = report::hex64(report::file_hash(config.generations));
  header.config_hash = report::config_hash(fields);
  header.notes.emplace_back("mode", raven::to_string(config.mode));
  if (!config.prompt_length_tag.empty()) header.notes.emplace_back("prompt_length", config.prompt_length_tag);
  header.notes.emplace_back("records", std::to_string(gens.records.size()));

  Table table;
  switch (config.analysis) {
    case Analysis::Ngram: {
      const auto profile = novelty_profile(index, gens.records, config.n_min, config.n_max, config.mode,
                                           nopts, config.jobs);
      const auto pw = summarize_pointwise(index, gens.records, config.mode, config.cap, nopts, config.jobs);
      header.notes.emplace_back("dup_trunc" + std::to_string(config.cap), fmt6(pw.truncated));
      header.notes.emplace_back("dup_untruncated", fmt6(pw.untruncated));
      table.columns = {"n", "total", "novel", "fraction", "macro_fraction"};
      for (const auto& row : profile.rows)
        table.rows.push_back({Cell(std::uint64_t{row.n}), Cell(row.total), Cell(row.novel),
                              optional_cell(row.fraction), optional_cell(row.macro_fraction)});
      if (!config.per_record_out.empty()) {
        Table per;
        per.columns = {"record_id", "tokens", "dup_trunc" + std::to_string(config.cap), "dup_untruncated"};
        for (std::size_t i = 0; i < gens.records.size(); ++i) {
          const auto& s = pw.per_record[i];
          per.rows.push_back({Cell(gens.records[i].id), Cell(std::uint64_t{s.scores.size()}),
                              Cell(s.truncated_mean), Cell(s.mean)});
        }
        report::write_report(config.per_record_out, header, per, config.format);
      }
      break;
    }
    case Analysis::Supercopy: {
      table.columns = {"record_id", "start", "length", "train_occurrences", "lead_100gram_occurrences", "text"};
      std::vector<std::vector<SupercopySpan>> spans(gens.records.size());
      parallel_for(gens.records.size(), config.jobs, [&](std::size_t i) {
        spans[i] = find_supercopies(index, gens.records[i], config.threshold);
      });
      std::size_t total = 0;
      for (std::size_t i = 0; i < spans.size(); ++i) {
        const auto& cont = gens.records[i].continuation;
        for (const auto& s : spans[i]) {
          const auto text = gens.oov.join(std::span<const TokenId>(cont).subspan(s.start, s.length));
          table.rows.push_back({Cell(gens.records[i].id), Cell(std::uint64_t{s.start}),
                                Cell(std::uint64_t{s.length}), Cell(s.train_occurrences),
                                s.lead_100gram_occurrences ? Cell(*s.lead_100gram_occurrences) : Cell(),
                                Cell(text)});
          ++total;
        }
      }
      header.notes.emplace_back("threshold", std::to_string(config.threshold));
      header.notes.emplace_back("spans", std::to_string(total));
      break;
    }
    case Analysis::Positions: {
      const auto profile = position_profile(index, gens.records, config.mode, config.bin_width, config.cap,
                                            nopts, config.jobs);
      header.notes.emplace_back("bin_width", std::to_string(profile.bin_width));
      header.notes.emplace_back("cap", std::to_string(profile.cap));
      header.notes.emplace_back("first_bin_discarded", "true");
      table.columns = {"bin_start", "bin_end", "tokens", "mean_score"};
      for (const auto& b : profile.bins)
        table.rows.push_back({Cell(std::uint64_t{b.begin}), Cell(std::uint64_t{b.end}), Cell(b.tokens),
                              Cell(b.mean)});
      break;
    }
    case Analysis::Quotes: {
      std::vector<std::vector<std::string>> tokens(gens.records.size());
      std::vector<std::vector<bool>> novel(gens.records.size());
      for (std::size_t i = 0; i < gens.records.size(); ++i) {
        const auto& cont = gens.records[i].continuation;
        for (auto id : cont) tokens[i].push_back(gens.oov.spell(id));
        novel[i] = unigram_novelty(index, cont);
      }
      const auto stats = quote_statistics(tokens, novel, config.quotes);
      for (const auto& w : stats.warnings) log << "warning: " << w << '\n';
      table.columns = {"metric", "value"};
      auto count_row = [&](const char* name, std::uint64_t v) { table.rows.push_back({Cell(name), Cell(v)}); };
      auto prob_row = [&](const char* name, std::optional<double> v) {
        table.rows.push_back({Cell(name), optional_cell(v)});
      };
      count_row("tokens", stats.tokens);
      count_row("novel", stats.novel);
      count_row("in_quotes", stats.in_quotes);
      count_row("novel_in_quotes", stats.novel_in_quotes);
      count_row("unmatched_openers", stats.unmatched_openers);
      prob_row("p_novel", stats.p_novel());
      prob_row("p_novel_given_quotes", stats.p_novel_given_quotes());
      prob_row("p_quotes", stats.p_quotes());
      prob_row("p_quotes_given_novel", stats.p_quotes_given_novel());
      break;
    }
  }
  report::write_report(config.out, header, table, config.format);
}

void run_syntax(const SyntaxOptions& opts, std::ostream& log) {
  if (opts.train_parses.empty() || opts.gen_parses.empty())
    throw Error("syntax analysis needs training and generated parses");
  std::vector<syntax::StructureKind> kinds;
  for (const auto& k : opts.kinds) {
    if (k == "all") {
      kinds.assign(std::begin(syntax::kAllKinds), std::end(syntax::kAllKinds));
      break;
    }
    kinds.push_back(syntax::parse_kind(k));
  }
  if (kinds.empty()) throw Error("no structure kind selected");

  const auto train = load_parse_set(opts.train_parses);
  const auto gen = load_parse_set(opts.gen_parses);

  std::map<std::string, std::string> fields;
  std::vector<std::string> names;
  for (auto k : kinds) names.push_back(syntax::to_string(k));
  fields["kinds"] = join(names, ",");
  fields["train"] = hash_files(opts.train_parses);
  fields["gen"] = hash_files(opts.gen_parses);
  fields["granularity"] = !opts.granularity ? "default"
                          : *opts.granularity == syntax::Granularity::Sentence ? "sentence"
                                                                                : "instance";
  fields["type_level"] = opts.type_level ? "1" : "0";
  fields["lowercase"] = opts.extract.lowercase ? "1" : "0";
  fields["exclude_root"] = opts.extract.exclude_root ? "1" : "0";
  fields["exclude_punct"] = opts.extract.exclude_punct ? "1" : "0";
  fields["collapse_noun_tags"] = opts.extract.collapse_noun_tags ? "1" : "0";
  fields["core_relations"] = join(opts.extract.core_relations, ",");

  Header header;
  header.command = "syntax";
  header.config_hash = report::config_hash(fields);
  header.notes.emplace_back("train_sentences", std::to_string(train.size()));
  header.notes.emplace_back("gen_sentences", std::to_string(gen.size()));

  Table table;
  table.columns = {"kind", "granularity", "total", "novel", "fraction", "index_size"};
  Table novel;
  novel.columns = {"kind", "sentence", "structure"};
  for (auto kind : kinds) {
    const auto index = syntax::build_structure_index(train, kind, opts.extract);
    const auto rep = syntax::syntax_novelty(index, gen, opts.granularity, opts.type_level);
    std::string gran = rep.granularity == syntax::Granularity::Sentence ? "sentence" : "instance";
    if (rep.type_level) gran += "-type";
    table.rows.push_back({Cell(syntax::to_string(kind)), Cell(gran), Cell(rep.total), Cell(rep.novel),
                          optional_cell(rep.fraction), Cell(std::uint64_t{index.size()})});
    for (const auto& item : rep.novel_items)
      novel.rows.push_back({Cell(syntax::to_string(kind)), Cell(std::uint64_t{item.sentence}),
                            Cell(syntax::display_key(item.key))});
  }
  report::write_report(opts.out, header, table, opts.format);
  if (!opts.novel_out.empty()) report::write_report(opts.novel_out, header, novel, opts.format);
  log << "scored " << gen.size() << " generated sentences against " << train.size() << " training sentences\n";
}

std::vector<lab::DecodingConfig> read_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed grid file: " + std::string(e.what()));
  }
  if (j.is_object() && j.contains("configs")) j = j["configs"];
  if (!j.is_array()) throw Error("grid file must hold an array of decoding configs");
  std::vector<lab::DecodingConfig> grid;
  for (const auto& e : j) {
    if (!e.is_object()) throw Error("grid entries must be objects");
    lab::DecodingConfig cfg;
    if (auto it = e.find("top_k"); it != e.end() && !it->is_null()) {
      if (it->is_string() && (*it == "inf" || *it == "V")) {
        cfg.top_k.reset();
      } else if (it->is_number_integer() && it->get<std::int64_t>() > 0) {
        cfg.top_k = it->get<std::size_t>();
      } else {
        throw Error("top_k must be a positive integer, null or \"inf\"");
      }
    }
    cfg.top_p = e.value("top_p", 1.0);
    cfg.temperature = e.value("temperature", 1.0);
    cfg.seed = e.value("seed", std::uint64_t{0});
    grid.push_back(cfg);
  }
  return grid;
}

void run_sweep(const SweepCommandOptions& opts, std::ostream& log) {
  require_file(opts.corpus, "corpus");
  require_file(opts.grid, "grid file");
  require_file(opts.prompts, "prompts file");

  auto docs = read_documents(opts.corpus, opts.separator);
  std::vector<Document> eval_docs;
  if (!opts.eval_corpus.empty()) {
    require_file(opts.eval_corpus, "evaluation corpus");
    eval_docs = read_documents(opts.eval_corpus, opts.separator);
  } else if (docs.size() >= 2) {
    const std::size_t held = std::max<std::size_t>(1, docs.size() / 5);
    eval_docs.assign(docs.end() - static_cast<std::ptrdiff_t>(held), docs.end());
    docs.resize(docs.size() - held);
  }
  const bool shared = eval_docs.empty();
  std::vector<Document> all = docs;
  all.insert(all.end(), eval_docs.begin(), eval_docs.end());
  const auto vocab = build_vocab(all);

  const auto gen_corpus = encode_corpus(docs, vocab);
  const auto eval_corpus = shared ? gen_corpus : encode_corpus(eval_docs, vocab);
  const auto generator = lab::NGramLM::train(gen_corpus, vocab.size(), opts.order, opts.alpha);
  const auto evaluator = lab::NGramLM::train(eval_corpus, vocab.size(), opts.order, opts.alpha);
  const auto index = SuffixIndex::build(gen_corpus, vocab);

  const auto prompt_set = load_prompts(opts.prompts, vocab);
  std::vector<TokenSeq> prompts;
  for (const auto& r : prompt_set.records) prompts.push_back(r.prompt);
  const auto grid = read_grid(opts.grid);

  lab::SweepOptions so;
  so.length = opts.length;
  so.cap = opts.cap;
  so.perplexity = {opts.stride, opts.max_len};
  so.jobs = opts.jobs;
  const auto result = lab::tradeoff_sweep(generator, index, prompts, grid, evaluator, so);

  std::map<std::string, std::string> fields;
  fields["corpus"] = report::hex64(report::file_hash(opts.corpus));
  fields["eval_corpus"] = opts.eval_corpus.empty() ? "split" : report::hex64(report::file_hash(opts.eval_corpus));
  fields["grid"] = report::hex64(report::file_hash(opts.grid));
  fields["prompts"] = report::hex64(report::file_hash(opts.prompts));
  fields["order"] = std::to_string(opts.order);
  fields["alpha"] = fmt6(opts.alpha);
  fields["length"] = std::to_string(opts.length);
  fields["cap"] = std::to_string(opts.cap);
  fields["stride"] = std::to_string(opts.stride);
  fields["max_len"] = std::to_string(opts.max_len);
  fields["separator"] = opts.separator == DocSeparator::Line ? "line" : "blank";

  Header header;
  header.command = "lab sweep";
  header.config_hash = report::config_hash(fields);
  header.index_fingerprint = index.fingerprint();
  header.notes.emplace_back("perplexity_note",
                            "perplexity comes from a smoothed n-gram evaluator trained on a held-out split; "
                            "it is an imperfect proxy for text quality");
  for (const auto& w : result.warnings) {
    header.notes.emplace_back("warning", w);
    log << "warning: " << w << '\n';
  }

  const std::string dup_col = "dup_trunc" + std::to_string(opts.cap);
  Table table;
  table.columns = {"top_k", "top_p", "temperature", "seed", dup_col, "dup_untruncated", "ppl"};
  for (const auto& row : result.rows)
    table.rows.push_back({row.config.top_k ? Cell(std::uint64_t{*row.config.top_k}) : Cell(std::string("inf")),
                          Cell(row.config.top_p), Cell(row.config.temperature), Cell(row.config.seed),
                          Cell(row.dup_truncated), Cell(row.dup_untruncated), Cell(row.perplexity)});
  report::write_report(opts.out, header, table, opts.format);

  if (!opts.plot_script.empty()) {
    std::ofstream gp(opts.plot_script, std::ios::trunc);
    if (!gp) throw Error("cannot write " + opts.plot_script.string());
    const std::string data = opts.out.empty() ? std::string("tradeoff.csv") : opts.out.string();
    gp << "# gnuplot script: duplication vs. perplexity per decoding config\n"
       << "set datafile separator ','\n"
       << "set datafile commentschars '#'\n"
       << "set key autotitle columnhead\n"
       << "set xlabel 'perplexity'\n"
       << "set ylabel 'mean pointwise duplication (truncated at " << opts.cap << ")'\n"
       << "set terminal pngcairo size 800,600\n"
       << "set output '" << data << ".png'\n"
       << "plot '" << data << "' using 'ppl':'" << dup_col << "' with points pt 7 title 'configs'\n";
  }
  log << "swept " << grid.size() << " decoding configs over " << prompts.size() << " prompts\n";
}

void probe_forms(const ProbeFormsOptions& opts, std::ostream& log) {
  const auto index = load_index(opts.index);
  require_file(opts.forms, "forms file");
  const auto forms = read_lines(opts.forms);
  const auto results = probes::probe_forms(index, forms);

  Header header;
  header.command = "probe forms";
  header.index_fingerprint = index.fingerprint();
  header.config_hash = report::config_hash({{"forms", report::hex64(report::file_hash(opts.forms))},
                                            {"index", report::hex64(*header.index_fingerprint)}});
  std::size_t present = 0;
  Table table;
  table.columns = {"form", "present", "count"};
  for (const auto& r : results) {
    present += r.present;
    table.rows.push_back({Cell(r.form), Cell(std::string(r.present ? "true" : "false")), Cell(r.count)});
  }
  header.notes.emplace_back("present", std::to_string(present) + "/" + std::to_string(results.size()));
  report::write_report(opts.out, header, table, opts.format);
  log << present << " of " << results.size() << " forms occur in training\n";
}

void probe_cvc(const ProbeCvcOptions& opts, std::ostream& log) {
  const auto index = load_index(opts.index);
  std::unordered_set<std::string> exclusions;
  if (!opts.exclude.empty()) {
    require_file(opts.exclude, "exclusion list");
    for (auto& w : read_lines(opts.exclude)) exclusions.insert(std::move(w));
  }
  const auto pairs = probes::generate_cvc_candidates(exclusions);
  const auto results = probes::cvc_presence_report(index, pairs);

  Header header;
  header.command = "probe cvc";
  header.index_fingerprint = index.fingerprint();
  header.config_hash = report::config_hash(
      {{"exclude", opts.exclude.empty() ? std::string("none") : report::hex64(report::file_hash(opts.exclude))},
       {"index", report::hex64(*header.index_fingerprint)}});
  std::map<std::string, std::size_t> tally;
  Table table;
  table.columns = {"singular", "plural", "singular_count", "plural_count", "class"};
  for (const auto& r : results) {
    ++tally[probes::to_string(r.presence)];
    table.rows.push_back({Cell(r.pair.singular), Cell(r.pair.plural), Cell(r.singular_count),
                          Cell(r.plural_count), Cell(probes::to_string(r.presence))});
  }
  header.notes.emplace_back("pairs", std::to_string(results.size()));
  for (auto p : {probes::Presence::BothPresent, probes::Presence::SingularOnly, probes::Presence::PluralOnly,
                 probes::Presence::Neither})
    header.notes.emplace_back(probes::to_string(p), std::to_string(tally[probes::to_string(p)]));
  report::write_report(opts.out, header, table, opts.format);
  log << results.size() << " candidate pairs after exclusions\n";
}

void compare(const CompareOptions& opts, std::ostream& log) {
  const auto left = report::read_csv(opts.left);
  const auto right = report::read_csv(opts.right);
  auto column = [&](const Table& t, const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < t.columns.size(); ++i)
      if (t.columns[i] == name) return i;
    return std::nullopt;
  };
  const auto lk = column(left, opts.key), rk = column(right, opts.key);
  if (!lk || !rk) throw Error("key column \"" + opts.key + "\" missing from an input");

  std::vector<std::pair<std::size_t, std::size_t>> shared;  // (left col, right col)
  for (std::size_t i = 0; i < left.columns.size(); ++i) {
    if (i == *lk) continue;
    if (auto j = column(right, left.columns[i])) shared.emplace_back(i, *j);
  }
  std::map<std::string, const std::vector<Cell>*> right_rows;
  for (const auto& row : right.rows)
    if (*rk < row.size()) right_rows[report::format_cell(row[*rk])] = &row;

  Table out;
  out.columns.push_back(opts.key);
  for (const auto& [i, j] : shared) {
    out.columns.push_back(left.columns[i] + "." + opts.left_label);
    out.columns.push_back(left.columns[i] + "." + opts.right_label);
  }
  for (const auto& row : left.rows) {
    if (*lk >= row.size()) continue;
    std::vector<Cell> joined{row[*lk]};
    auto it = right_rows.find(report::format_cell(row[*lk]));
    for (const auto& [i, j] : shared) {
      joined.push_back(i < row.size() ? row[i] : Cell());
      joined.push_back(it != right_rows.end() && j < it->second->size() ? (*it->second)[j] : Cell());
    }
    out.rows.push_back(std::move(joined));
  }

  Header header;
  header.command = "compare";
  header.config_hash = report::config_hash({{"left", report::hex64(report::file_hash(opts.left))},
                                            {"right", report::hex64(report::file_hash(opts.right))},
                                            {"key", opts.key}});
  header.notes.emplace_back("left", opts.left_label);
  header.notes.emplace_back("right", opts.right_label);
  report::write_report(opts.out, header, out, report::Format::Csv);
  log << "joined " << out.rows.size() << " rows on " << opts.key << '\n';
}

}  // namespace raven::commands
