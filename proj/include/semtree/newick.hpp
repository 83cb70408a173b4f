#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "semtree/corpus.hpp"
#include "semtree/tree.hpp"

namespace semtree {

// Generic rooted tree with optional branch lengths, the common denominator
// of the Newick format.
struct NewickNode {
  std::string label;
  std::optional<double> length;  // length of the edge to the parent
  std::vector<NewickNode> children;

  bool is_leaf() const { return children.empty(); }
};

// Serializes a tree as a single Newick string terminated by ";". Lengths
// are printed with enough digits to survive a parse round-trip exactly.
std::string write_newick(const NewickNode& root);

// Recursive-descent Newick parser. Reports unbalanced parentheses, trailing
// garbage and malformed lengths with the byte position of the problem.
NewickNode parse_newick(const std::string& text);

// Replaces Newick-reserved characters `(),:;[]'` and whitespace with '_'.
std::string sanitize_newick_label(const std::string& raw);

// Renders a semantic tree: internal nodes are named L<layer>C<cluster>,
// branch lengths are epsilon differences between stored layers, and, when
// with_documents is set, every document hangs as a zero-length leaf under
// its attachment node. Children are ordered by cluster id, then document id.
NewickNode semantic_tree_topology(const SemanticTree& tree,
                                  const std::vector<TreeNode>& attachment,
                                  const Corpus* corpus,  // names doc leaves; may be null
                                  bool with_documents);

std::string to_newick(const SemanticTree& tree, const std::vector<TreeNode>& attachment,
                      const Corpus* corpus, bool with_documents);

}  // namespace semtree
