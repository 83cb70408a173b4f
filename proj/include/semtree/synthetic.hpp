#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include "semtree/corpus.hpp"

namespace semtree {

// One isotropic Gaussian blob.
struct BlobSpec {
  Eigen::VectorXd center;
  int count = 0;
  double sigma = 0.0;
  std::string label;
};

// Samples labeled blobs; document i of blob b is named "doc<running index>"
// and labeled with the blob's label. Identical seeds give identical corpora
// on every platform.
Corpus make_blobs(const std::vector<BlobSpec>& blobs, std::uint64_t seed);

// Two-level layout: `groups` super-groups, each holding `blobs_per_group`
// blobs. Group centers sit on a circle of diameter group_separation; blob
// centers sit around their group center at blob_separation. Fine labels
// (per blob) land in the corpus; coarse labels (per group) come alongside.
struct HierarchicalBlobSpec {
  int groups = 2;
  int blobs_per_group = 2;
  int points_per_blob = 50;
  int dim = 2;
  double sigma = 0.05;
  double blob_separation = 1.0;
  double group_separation = 10.0;
};

struct SyntheticCorpus {
  Corpus corpus;                          // labels = fine (per blob)
  std::vector<std::string> fine_labels;   // same as corpus.labels
  std::vector<std::string> coarse_labels; // per super-group
};

SyntheticCorpus make_hierarchical_blobs(const HierarchicalBlobSpec& spec, std::uint64_t seed);

// Blob centers at the corners of the unit square (exactly 4 blobs).
std::vector<Eigen::VectorXd> unit_square_corners();

}  // namespace semtree
