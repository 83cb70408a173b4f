#pragma once

#include <functional>
#include <string>
#include <vector>

#include "semtree/dbscan.hpp"

namespace semtree {

// Parameters of the relaxation schedule: DBSCAN runs at
// epsilon0, epsilon0 + delta_epsilon, epsilon0 + 2*delta_epsilon, ...
// with minpts held constant.
struct DbscanParams {
  double epsilon0 = 0.0;
  double delta_epsilon = 0.0;
  int minpts = 5;
  Metric metric = Metric::kL2;
  long max_iterations = 100000;
};

// Identifies a cluster within a stored layer.
struct TreeNode {
  int layer = 0;
  int cluster = 0;

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

std::string node_name(const TreeNode& node);  // "L<layer>C<cluster>"

// Per-pass diagnostics from a tree build: cluster/noise counts and the
// neighbor-query work the pass consumed.
struct PassRecord {
  long pass = 0;
  double epsilon = 0.0;
  int clusters = 0;
  int noise = 0;
  bool stored = false;
  QueryStats work;
};

struct BuildReport {
  std::vector<PassRecord> passes;
};

// Nested multi-scale clustering: the stored DBSCAN layers (strictly
// decreasing cluster counts, increasing epsilon) plus the parent edges that
// link each cluster to the cluster embedding it at the next stored layer.
// The final layer holds the root: a single cluster covering every point.
class SemanticTree {
 public:
  DbscanParams params;
  int n_points = 0;
  std::vector<ClusterLayer> layers;
  // parents[L][c] = the cluster id at layer L+1 that embeds cluster c of
  // layer L; defined for every layer but the last.
  std::vector<std::vector<int>> parents;
  // True when the schedule hit max_iterations and the root layer was
  // synthesized rather than produced by a DBSCAN pass.
  bool synthetic_root = false;

  int layer_count() const { return static_cast<int>(layers.size()); }
  TreeNode root() const { return {layer_count() - 1, 0}; }
  int parent_cluster(const TreeNode& node) const {
    return parents[static_cast<size_t>(node.layer)][static_cast<size_t>(node.cluster)];
  }

  // Full member set of a node: the points assigned to the cluster at its
  // layer, closed over all descendant nodes. Sorted ascending. Computed once
  // at build/load time.
  const std::vector<int>& members(int layer, int cluster) const {
    return members_[static_cast<size_t>(layer)][static_cast<size_t>(cluster)];
  }
  const std::vector<int>& members(const TreeNode& node) const {
    return members(node.layer, node.cluster);
  }

  // Child clusters of a node in the immediately denser layer, ascending.
  std::vector<TreeNode> children(const TreeNode& node) const;

  void finalize();         // recomputes parents, then member sets
  void rebuild_members();  // recomputes member sets from existing parents

 private:
  std::vector<std::vector<std::vector<int>>> members_;
};

// Runs the relaxation schedule. The first pass producing at least one
// cluster seeds layer 0; later passes are stored when their cluster count
// strictly undercuts the last stored layer's. A pass whose single cluster
// covers every point is always stored as the root and ends the schedule.
// If max_iterations passes elapse first, a synthetic root is appended and
// flagged; if no cluster ever formed by then, the build fails.
//
// `report` (optional) receives one record per executed pass; `on_pass`
// (optional) is invoked per pass, e.g. for verbose logging.
SemanticTree build_tree(NeighborIndex& index, const DbscanParams& params,
                        BuildReport* report = nullptr,
                        const std::function<void(const PassRecord&)>& on_pass = nullptr);

// Maps every document to the node of the densest stored layer where it is
// not noise; documents that are noise everywhere below the root map to the
// root itself.
std::vector<TreeNode> attach_documents(const SemanticTree& tree);

// Line-oriented text serialization; numbers are printed so that save ->
// load -> save reproduces the file byte for byte.
void save_tree(const SemanticTree& tree, const std::string& path);
SemanticTree load_tree(const std::string& path);

// Checks the structural invariants (strict member nesting, strictly
// decreasing stored cluster counts, non-increasing noise counts, root
// covering all points); throws DataError with a description on violation.
void validate_tree(const SemanticTree& tree);

}  // namespace semtree
