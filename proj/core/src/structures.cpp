#include <algorithm>
#include <unordered_set>

#include "raven/error.hpp"
#include "raven/syntax.hpp"

namespace raven::syntax {

namespace {

// Fields are tab-joined; backslash, tab and newline inside a field are escaped
// so the encoding stays injective.
void append_field(std::string& key, std::string_view field, bool first) {
  if (!first) key.push_back('\t');
  for (char c : field) {
    switch (c) {
      case '\\': key += "\\\\"; break;
      case '\t': key += "\\t"; break;
      case '\n': key += "\\n"; break;
      default: key.push_back(c);
    }
  }
}

std::string encode(std::initializer_list<std::string_view> fields) {
  std::string key;
  bool first = true;
  for (auto f : fields) {
    append_field(key, f, first);
    first = false;
  }
  return key;
}

std::string lower(std::string s) {
  for (char& c : s)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return s;
}

// Bracketed labels escape the characters that delimit trees.
void append_label(std::string& out, std::string_view label) {
  for (char c : label) {
    if (c == '(' || c == ')' || c == ' ' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
}

void render_structure(const TreeNode& n, std::string& out) {
  out.push_back('(');
  append_label(out, n.label);
  for (const auto& c : n.children) {
    if (c.is_leaf()) continue;
    out.push_back(' ');
    render_structure(c, out);
  }
  out.push_back(')');
}

void collect_rules(const TreeNode& n, std::vector<std::string>& out) {
  if (n.is_leaf() || n.is_preterminal()) return;
  const bool lexical = std::any_of(n.children.begin(), n.children.end(),
                                   [](const TreeNode& c) { return c.is_leaf(); });
  if (!lexical) {
    std::string key;
    append_field(key, n.label, true);
    for (const auto& c : n.children) append_field(key, c.label, false);
    out.push_back(std::move(key));
  }
  for (const auto& c : n.children) collect_rules(c, out);
}

const TreeNode& require_tree(const SentenceParse& p, StructureKind kind) {
  if (!p.constituency)
    throw Error(std::string("structure kind ") + to_string(kind) + " needs a constituency parse");
  return *p.constituency;
}

const std::vector<DepRow>& require_deps(const SentenceParse& p, StructureKind kind) {
  if (!p.dependency)
    throw Error(std::string("structure kind ") + to_string(kind) + " needs a dependency parse");
  return *p.dependency;
}

bool keep_arc(const DepRow& r, const ExtractOptions& opts) {
  if (opts.exclude_root && r.head == 0) return false;
  if (opts.exclude_punct && r.deprel == "punct") return false;
  return true;
}

std::string unescape_brackets(const std::string& w) {
  static const std::pair<std::string_view, std::string_view> kEscapes[] = {
      {"-LRB-", "("}, {"-RRB-", ")"}, {"-LCB-", "{"}, {"-RCB-", "}"}, {"-LSB-", "["}, {"-RSB-", "]"}};
  for (const auto& [esc, raw] : kEscapes)
    if (w == esc) return std::string(raw);
  return w;
}

}  // namespace

const char* to_string(StructureKind kind) {
  switch (kind) {
    case StructureKind::PosSequence: return "posseq";
    case StructureKind::ParseStructure: return "parse";
    case StructureKind::DepArc: return "deparc";
    case StructureKind::DepRole: return "deprole";
    case StructureKind::CfgRule: return "cfgrule";
    case StructureKind::WordPos: return "wordpos";
    case StructureKind::ArgStructure: return "argstruct";
  }
  return "?";
}

StructureKind parse_kind(std::string_view name) {
  for (auto k : kAllKinds)
    if (name == to_string(k)) return k;
  throw Error("unknown structure kind: " + std::string(name));
}

bool needs_constituency(StructureKind kind) {
  switch (kind) {
    case StructureKind::PosSequence:
    case StructureKind::ParseStructure:
    case StructureKind::CfgRule:
    case StructureKind::WordPos: return true;
    default: return false;
  }
}

bool sentence_level(StructureKind kind) {
  return kind == StructureKind::PosSequence || kind == StructureKind::ParseStructure;
}

std::vector<SentenceParse> merge_parses(std::vector<SentenceParse> dependency,
                                        std::vector<SentenceParse> constituency) {
  if (dependency.size() != constituency.size())
    throw Error("dependency and constituency files hold different sentence counts");
  for (std::size_t i = 0; i < dependency.size(); ++i) {
    auto& d = dependency[i];
    auto& c = constituency[i];
    if (!d.dependency || !c.constituency) throw Error("merge expects one analysis of each type");
    bool same = d.words.size() == c.words.size();
    for (std::size_t w = 0; same && w < d.words.size(); ++w)
      same = unescape_brackets(d.words[w]) == unescape_brackets(c.words[w]);
    if (!same) throw Error("sentence " + std::to_string(i) + ": dependency and constituency words differ");
    d.constituency = std::move(c.constituency);
  }
  return dependency;
}

std::vector<std::string> extract_structures(const SentenceParse& parse, StructureKind kind,
                                            const ExtractOptions& opts) {
  std::vector<std::string> out;
  auto form = [&](const std::string& w) { return opts.lowercase ? lower(w) : w; };

  switch (kind) {
    case StructureKind::PosSequence: {
      const auto tags = preterminal_tags(require_tree(parse, kind));
      std::string joined;
      for (std::size_t i = 0; i < tags.size(); ++i) {
        if (i) joined.push_back(' ');
        joined += tags[i];
      }
      out.push_back(encode({joined}));
      break;
    }
    case StructureKind::ParseStructure: {
      std::string rendered;
      render_structure(require_tree(parse, kind), rendered);
      out.push_back(encode({rendered}));
      break;
    }
    case StructureKind::CfgRule:
      collect_rules(require_tree(parse, kind), out);
      break;
    case StructureKind::WordPos: {
      const auto& tree = require_tree(parse, kind);
      const auto words = leaves(tree);
      const auto tags = preterminal_tags(tree);
      if (words.size() != tags.size())
        throw Error("constituency tree has leaves without preterminal tags");
      for (std::size_t i = 0; i < words.size(); ++i) {
        std::string tag = tags[i];
        if (opts.collapse_noun_tags && tag.starts_with("NN")) tag = "NOUN";
        out.push_back(encode({form(words[i]), tag}));
      }
      break;
    }
    case StructureKind::DepArc: {
      const auto& rows = require_deps(parse, kind);
      for (const auto& r : rows) {
        if (!keep_arc(r, opts)) continue;
        const std::string head = r.head == 0 ? std::string(kRootForm) : form(rows[r.head - 1].form);
        out.push_back(encode({r.deprel, head, form(r.form)}));
      }
      break;
    }
    case StructureKind::DepRole: {
      const auto& rows = require_deps(parse, kind);
      for (const auto& r : rows) {
        if (!keep_arc(r, opts)) continue;
        const std::string head = r.head == 0 ? std::string(kRootForm) : form(rows[r.head - 1].form);
        out.push_back(encode({head, r.deprel, "head"}));
        out.push_back(encode({form(r.form), r.deprel, "dependent"}));
      }
      break;
    }
    case StructureKind::ArgStructure: {
      const auto& rows = require_deps(parse, kind);
      for (std::size_t v = 0; v < rows.size(); ++v) {
        const auto& verb = rows[v];
        if (!verb.xpos.starts_with("VB") && verb.upos != "VERB") continue;
        std::vector<std::string> rels;
        for (const auto& r : rows) {
          if (r.head != v + 1) continue;
          if (std::find(opts.core_relations.begin(), opts.core_relations.end(), r.deprel) !=
              opts.core_relations.end())
            rels.push_back(r.deprel);
        }
        std::sort(rels.begin(), rels.end());
        std::string key;
        append_field(key, form(verb.form), true);
        for (const auto& rel : rels) append_field(key, rel, false);
        out.push_back(std::move(key));
      }
      break;
    }
  }
  return out;
}

StructureIndex build_structure_index(std::span<const SentenceParse> training, StructureKind kind,
                                     const ExtractOptions& opts) {
  if (training.empty()) throw Error("empty training parse list");
  StructureIndex index(kind, opts);
  for (const auto& s : training)
    for (auto& key : extract_structures(s, kind, opts)) index.insert(std::move(key));
  return index;
}

SyntaxNoveltyReport syntax_novelty(const StructureIndex& index,
                                   std::span<const SentenceParse> generated,
                                   std::optional<Granularity> granularity, bool type_level) {
  SyntaxNoveltyReport report;
  report.kind = index.kind();
  report.granularity = sentence_level(index.kind())
                           ? Granularity::Sentence
                           : granularity.value_or(Granularity::Instance);
  report.type_level = type_level && report.granularity == Granularity::Instance;

  std::unordered_set<std::string> seen_types;
  for (std::size_t i = 0; i < generated.size(); ++i) {
    const auto keys = extract_structures(generated[i], index.kind(), index.options());
    if (report.granularity == Granularity::Sentence) {
      if (keys.empty()) continue;
      ++report.total;
      bool novel = false;
      for (const auto& k : keys) {
        if (index.contains(k)) continue;
        novel = true;
        report.novel_items.push_back({i, k});
      }
      if (novel) ++report.novel;
      continue;
    }
    for (const auto& k : keys) {
      if (report.type_level && !seen_types.insert(k).second) continue;
      ++report.total;
      if (!index.contains(k)) {
        ++report.novel;
        report.novel_items.push_back({i, k});
      }
    }
  }
  if (report.total > 0)
    report.fraction = static_cast<double>(report.novel) / static_cast<double>(report.total);
  return report;
}

std::string display_key(std::string_view key) {
  std::string out;
  for (std::size_t i = 0; i < key.size(); ++i) {
    if (key[i] == '\t') {
      out += " | ";
    } else {
      out.push_back(key[i]);
    }
  }
  return out;
}

}  // namespace raven::syntax
