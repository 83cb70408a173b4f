#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include "semtree/tree.hpp"

namespace semtree {

// Co-occurrence counts between predicted clusters (rows) and reference
// labels (columns), restricted to the covered subset: positions where the
// prediction is kNoise are excluded from both partitions.
struct ContingencyTable {
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;  // r x s
  std::vector<std::int64_t> row_sums;
  std::vector<std::int64_t> col_sums;
  std::int64_t total = 0;

  ContingencyTable transposed() const;
};

// Encodes label strings as dense integer codes in first-appearance order.
std::vector<int> encode_labels(const std::vector<std::string>& labels);

// Builds the table over covered points only. truth codes must be
// non-negative at every covered position. Throws DataError when every
// point is noise.
ContingencyTable contingency(const Eigen::Ref<const Eigen::VectorXi>& pred,
                             const std::vector<int>& truth);

// Adjusted Rand Index from the table. Binomial sums are accumulated in
// 64-bit integers and only the final ratio is floating point. Identical
// partitions (including the single-cluster and all-singleton degenerate
// pairs) score exactly 1. Requires total >= 2.
double adjusted_rand_index(const ContingencyTable& table);

// NMI with arithmetic-mean normalization and natural-log entropies.
// Conventions: 1 when both marginal entropies vanish, 0 when exactly one
// does. Requires total >= 1.
double normalized_mutual_information(const ContingencyTable& table);

// Agreement of one stored layer with the reference labeling, computed over
// the points that layer covers.
struct LayerScore {
  int layer_index = 0;
  double epsilon = 0.0;
  int covered_count = 0;
  double ari = 0.0;
  double nmi = 0.0;
};

// Scores every stored layer, densest first. truth must hold a code for all
// n points. A layer covering a single point scores 1/1 by the degenerate
// conventions above.
std::vector<LayerScore> score_layers(const SemanticTree& tree, const std::vector<int>& truth);

// Tab-separated score table: `layer epsilon covered ari nmi` with a header.
void write_scores(const std::vector<LayerScore>& scores, const std::string& path);
// Plot-ready long format: one `layer epsilon metric value` row per score.
void write_scores_long(const std::vector<LayerScore>& scores, const std::string& path);

}  // namespace semtree
