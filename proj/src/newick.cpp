#include "semtree/newick.hpp"

#include <cctype>
#include <cstdio>
#include <stdexcept>

#include "semtree/errors.hpp"

namespace semtree {

namespace {

void append_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

void write_node(const NewickNode& node, std::string& out) {
  if (!node.children.empty()) {
    out.push_back('(');
    for (size_t i = 0; i < node.children.size(); ++i) {
      if (i > 0) out.push_back(',');
      write_node(node.children[i], out);
    }
    out.push_back(')');
  }
  out += node.label;
  if (node.length) {
    out.push_back(':');
    append_double(out, *node.length);
  }
}

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  NewickNode run() {
    NewickNode root = parse_subtree();
    skip_space();
    if (pos_ >= text_.size() || text_[pos_] != ';') {
      fail("expected ';' terminating the tree");
    }
    ++pos_;
    skip_space();
    if (pos_ != text_.size()) fail("trailing garbage after ';'");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    throw DataError("newick parse error at position " + std::to_string(pos_) + ": " + message);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  NewickNode parse_subtree() {
    skip_space();
    NewickNode node;
    if (pos_ < text_.size() && text_[pos_] == '(') {
      ++pos_;
      while (true) {
        node.children.push_back(parse_subtree());
        skip_space();
        if (pos_ >= text_.size()) fail("unbalanced parentheses");
        if (text_[pos_] == ',') {
          ++pos_;
          continue;
        }
        if (text_[pos_] == ')') {
          ++pos_;
          break;
        }
        fail("expected ',' or ')'");
      }
    }
    node.label = parse_label();
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == ':') {
      ++pos_;
      node.length = parse_length();
    }
    return node;
  }

  std::string parse_label() {
    skip_space();
    const size_t start = pos_;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '(' || c == ')' || c == ',' || c == ':' || c == ';' ||
          std::isspace(static_cast<unsigned char>(c))) {
        break;
      }
      ++pos_;
    }
    return text_.substr(start, pos_ - start);
  }

  double parse_length() {
    skip_space();
    const size_t start = pos_;
    size_t consumed = 0;
    double value = 0.0;
    try {
      value = std::stod(text_.substr(start), &consumed);
    } catch (const std::exception&) {
      fail("malformed branch length");
    }
    if (consumed == 0) fail("malformed branch length");
    pos_ = start + consumed;
    return value;
  }

  const std::string& text_;
  size_t pos_ = 0;
};

}  // namespace

std::string write_newick(const NewickNode& root) {
  std::string out;
  write_node(root, out);
  out.push_back(';');
  return out;
}

NewickNode parse_newick(const std::string& text) { return Parser(text).run(); }

std::string sanitize_newick_label(const std::string& raw) {
  std::string out = raw;
  for (char& c : out) {
    if (c == '(' || c == ')' || c == ',' || c == ':' || c == ';' || c == '[' || c == ']' ||
        c == '\'' || std::isspace(static_cast<unsigned char>(c))) {
      c = '_';
    }
  }
  return out;
}

namespace {

NewickNode build_node(const SemanticTree& tree, const TreeNode& node,
                      const std::vector<std::vector<int>>& docs_at,
                      const Corpus* corpus, bool with_documents) {
  NewickNode out;
  out.label = node_name(node);
  for (const TreeNode& child : tree.children(node)) {
    NewickNode sub = build_node(tree, child, docs_at, corpus, with_documents);
    sub.length = tree.layers[static_cast<size_t>(node.layer)].epsilon -
                 tree.layers[static_cast<size_t>(child.layer)].epsilon;
    out.children.push_back(std::move(sub));
  }
  if (with_documents) {
    // flattened attachment lists are indexed by layer-major node order
    size_t flat = 0;
    for (int L = 0; L < node.layer; ++L) {
      flat += static_cast<size_t>(tree.layers[static_cast<size_t>(L)].cluster_count);
    }
    flat += static_cast<size_t>(node.cluster);
    for (int doc : docs_at[flat]) {
      NewickNode leaf;
      leaf.label = corpus ? sanitize_newick_label(corpus->external_ids[static_cast<size_t>(doc)])
                          : "doc" + std::to_string(doc);
      leaf.length = 0.0;
      out.children.push_back(std::move(leaf));
    }
  }
  return out;
}

}  // namespace

NewickNode semantic_tree_topology(const SemanticTree& tree,
                                  const std::vector<TreeNode>& attachment,
                                  const Corpus* corpus, bool with_documents) {
  size_t total_nodes = 0;
  for (const auto& layer : tree.layers) {
    total_nodes += static_cast<size_t>(layer.cluster_count);
  }
  std::vector<std::vector<int>> docs_at(total_nodes);
  if (with_documents) {
    for (size_t i = 0; i < attachment.size(); ++i) {
      const TreeNode& node = attachment[i];
      size_t flat = 0;
      for (int L = 0; L < node.layer; ++L) {
        flat += static_cast<size_t>(tree.layers[static_cast<size_t>(L)].cluster_count);
      }
      flat += static_cast<size_t>(node.cluster);
      docs_at[flat].push_back(static_cast<int>(i));
    }
  }
  return build_node(tree, tree.root(), docs_at, corpus, with_documents);
}

std::string to_newick(const SemanticTree& tree, const std::vector<TreeNode>& attachment,
                      const Corpus* corpus, bool with_documents) {
  return write_newick(semantic_tree_topology(tree, attachment, corpus, with_documents));
}

}  // namespace semtree
