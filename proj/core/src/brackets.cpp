#include <istream>

#include "raven/error.hpp"
#include "raven/syntax.hpp"

namespace raven::syntax {

namespace {

class TreeParser {
 public:
  explicit TreeParser(std::string_view text) : text_(text) {}

  TreeNode parse() {
    skip_space();
    if (!consume('(')) throw Error("bracket imbalance");
    TreeNode root = node();
    skip_space();
    if (pos_ != text_.size()) throw Error("bracket imbalance");
    // Penn treebank files wrap each tree in an unlabeled outer bracket.
    if (root.label.empty() && root.children.size() == 1 && !root.children[0].is_leaf())
      return std::move(root.children[0]);
    return root;
  }

 private:
  // Called just after an opening bracket.
  TreeNode node() {
    TreeNode n;
    skip_space();
    if (peek() != '(' && peek() != ')') n.label = atom();
    while (true) {
      skip_space();
      if (pos_ >= text_.size()) throw Error("bracket imbalance");
      if (consume(')')) break;
      if (consume('(')) {
        n.children.push_back(node());
      } else {
        n.children.push_back(TreeNode{atom(), {}});
      }
    }
    return n;
  }

  std::string atom() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !is_space(text_[pos_]) && text_[pos_] != '(' && text_[pos_] != ')')
      ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }
  void skip_space() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
  }
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  bool consume(char c) {
    if (peek() != c) return false;
    ++pos_;
    return true;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void collect_leaves(const TreeNode& n, std::vector<std::string>& out) {
  if (n.is_leaf()) {
    out.push_back(n.label);
    return;
  }
  for (const auto& c : n.children) collect_leaves(c, out);
}

void collect_tags(const TreeNode& n, std::vector<std::string>& out) {
  if (n.is_preterminal()) {
    out.push_back(n.label);
    return;
  }
  for (const auto& c : n.children) collect_tags(c, out);
}

}  // namespace

TreeNode parse_tree(std::string_view text) { return TreeParser(text).parse(); }

std::vector<std::string> leaves(const TreeNode& tree) {
  std::vector<std::string> out;
  collect_leaves(tree, out);
  return out;
}

std::vector<std::string> preterminal_tags(const TreeNode& tree) {
  std::vector<std::string> out;
  collect_tags(tree, out);
  return out;
}

std::vector<SentenceParse> read_brackets(std::istream& in) {
  std::vector<SentenceParse> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    SentenceParse s;
    try {
      s.constituency = parse_tree(line);
    } catch (const Error& e) {
      throw Error(std::string(e.what()) + " at line " + std::to_string(line_no));
    }
    s.words = leaves(*s.constituency);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace raven::syntax
