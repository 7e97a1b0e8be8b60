#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace raven::syntax {

struct DepRow {
  std::string form;
  std::string upos;
  std::string xpos;
  std::uint32_t head = 0;  // 0 is the virtual ROOT; words are numbered from 1
  std::string deprel;
};

struct TreeNode {
  std::string label;  // nonterminal or preterminal tag; the word itself for leaves
  std::vector<TreeNode> children;

  bool is_leaf() const noexcept { return children.empty(); }
  bool is_preterminal() const noexcept { return children.size() == 1 && children[0].is_leaf(); }
  bool operator==(const TreeNode&) const = default;
};

// One sentence with a dependency analysis, a constituency tree, or both.
struct SentenceParse {
  std::vector<std::string> words;
  std::optional<std::vector<DepRow>> dependency;
  std::optional<TreeNode> constituency;
};

enum class ParseFormat { Conllu, Brackets };

// Guesses the format from the extension: .conllu/.conll/.conllx are CoNLL-U,
// anything else is one bracketed tree per line.
ParseFormat format_for_path(const std::filesystem::path& path);

std::vector<SentenceParse> read_conllu(std::istream& in);
std::vector<SentenceParse> read_brackets(std::istream& in);
std::vector<SentenceParse> load_parses(const std::filesystem::path& path, ParseFormat format);

// Parses a single bracketed tree, e.g. "(S (NP (DT The) (NN cat)) (VP (VBZ sleeps)))".
TreeNode parse_tree(std::string_view text);
std::vector<std::string> leaves(const TreeNode& tree);
std::vector<std::string> preterminal_tags(const TreeNode& tree);

// Pairs dependency and constituency analyses of the same sentences, in order.
std::vector<SentenceParse> merge_parses(std::vector<SentenceParse> dependency,
                                        std::vector<SentenceParse> constituency);

enum class StructureKind { PosSequence, ParseStructure, DepArc, DepRole, CfgRule, WordPos, ArgStructure };

inline constexpr StructureKind kAllKinds[] = {
    StructureKind::PosSequence, StructureKind::ParseStructure, StructureKind::DepArc,
    StructureKind::DepRole,     StructureKind::CfgRule,        StructureKind::WordPos,
    StructureKind::ArgStructure};

const char* to_string(StructureKind kind);
StructureKind parse_kind(std::string_view name);
bool needs_constituency(StructureKind kind);
// Kinds with one structure per sentence are always scored per sentence.
bool sentence_level(StructureKind kind);

inline constexpr std::string_view kRootForm = "⟨ROOT⟩";

struct ExtractOptions {
  bool lowercase = false;
  bool exclude_root = false;
  bool exclude_punct = false;
  bool collapse_noun_tags = false;
  std::vector<std::string> core_relations{"nsubj", "nsubj:pass", "obj", "iobj"};
};

// Canonical encodings of every structure of `kind` in the sentence (a
// multiset: repeated structures appear repeatedly). Throws when the sentence
// lacks the analysis the kind needs.
std::vector<std::string> extract_structures(const SentenceParse& parse, StructureKind kind,
                                            const ExtractOptions& opts = {});

class StructureIndex {
 public:
  StructureIndex(StructureKind kind, ExtractOptions opts) : kind_(kind), opts_(std::move(opts)) {}

  bool contains(const std::string& key) const { return keys_.count(key) != 0; }
  void insert(std::string key) { keys_.insert(std::move(key)); }
  std::size_t size() const noexcept { return keys_.size(); }
  StructureKind kind() const noexcept { return kind_; }
  const ExtractOptions& options() const noexcept { return opts_; }

 private:
  StructureKind kind_;
  ExtractOptions opts_;
  std::unordered_set<std::string> keys_;
};

StructureIndex build_structure_index(std::span<const SentenceParse> training, StructureKind kind,
                                     const ExtractOptions& opts = {});

enum class Granularity { Sentence, Instance };

struct NovelItem {
  std::size_t sentence = 0;
  std::string key;
};

struct SyntaxNoveltyReport {
  StructureKind kind = StructureKind::PosSequence;
  Granularity granularity = Granularity::Sentence;
  bool type_level = false;
  std::uint64_t total = 0;
  std::uint64_t novel = 0;
  std::optional<double> fraction;
  std::vector<NovelItem> novel_items;
};

// Sentence granularity: a sentence is novel when any of its structures is
// absent from the index. Instance granularity: each extracted structure is
// counted, or each distinct one when `type_level` is set.
SyntaxNoveltyReport syntax_novelty(const StructureIndex& index,
                                   std::span<const SentenceParse> generated,
                                   std::optional<Granularity> granularity = std::nullopt,
                                   bool type_level = false);

// Human-readable rendering of an encoded structure key.
std::string display_key(std::string_view key);

}  // namespace raven::syntax
