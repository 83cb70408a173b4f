#include "semtree/synthetic.hpp"

#include <cmath>

#include "semtree/errors.hpp"
#include "semtree/rng.hpp"

namespace semtree {

Corpus make_blobs(const std::vector<BlobSpec>& blobs, std::uint64_t seed) {
  if (blobs.empty()) throw UsageError("make_blobs: need at least one blob");
  Eigen::Index dim = -1;
  Eigen::Index total = 0;
  for (const auto& blob : blobs) {
    if (blob.count < 1) throw UsageError("make_blobs: blob sizes must be positive");
    if (blob.sigma < 0.0) throw UsageError("make_blobs: sigma must be non-negative");
    if (dim < 0) dim = blob.center.size();
    if (blob.center.size() != dim || dim < 1) {
      throw UsageError("make_blobs: inconsistent or empty blob centers");
    }
    total += blob.count;
  }

  Corpus corpus;
  corpus.embeddings.resize(total, dim);
  corpus.external_ids.reserve(static_cast<size_t>(total));
  corpus.texts.assign(static_cast<size_t>(total), "");
  corpus.labels.reserve(static_cast<size_t>(total));

  Rng rng(seed);
  Eigen::Index row = 0;
  for (const auto& blob : blobs) {
    for (int p = 0; p < blob.count; ++p) {
      for (Eigen::Index c = 0; c < dim; ++c) {
        corpus.embeddings(row, c) =
            static_cast<float>(blob.center[c] + blob.sigma * rng.normal());
      }
      corpus.external_ids.push_back("doc" + std::to_string(row));
      corpus.labels.push_back(blob.label);
      ++row;
    }
  }
  return corpus;
}

std::vector<Eigen::VectorXd> unit_square_corners() {
  std::vector<Eigen::VectorXd> corners(4, Eigen::VectorXd(2));
  corners[0] << 0.0, 0.0;
  corners[1] << 1.0, 0.0;
  corners[2] << 0.0, 1.0;
  corners[3] << 1.0, 1.0;
  return corners;
}

SyntheticCorpus make_hierarchical_blobs(const HierarchicalBlobSpec& spec, std::uint64_t seed) {
  if (spec.groups < 1 || spec.blobs_per_group < 1 || spec.points_per_blob < 1) {
    throw UsageError("make_hierarchical_blobs: counts must be positive");
  }
  if (spec.dim < 2) throw UsageError("make_hierarchical_blobs: dim must be >= 2");
  if (spec.sigma < 0.0 || spec.blob_separation <= 0.0 || spec.group_separation <= 0.0) {
    throw UsageError("make_hierarchical_blobs: degenerate spread parameters");
  }

  std::vector<BlobSpec> blobs;
  blobs.reserve(static_cast<size_t>(spec.groups) * static_cast<size_t>(spec.blobs_per_group));
  for (int g = 0; g < spec.groups; ++g) {
    Eigen::VectorXd group_center = Eigen::VectorXd::Zero(spec.dim);
    if (spec.groups > 1) {
      const double angle = 2.0 * M_PI * g / spec.groups;
      const double radius = spec.group_separation / (2.0 * std::sin(M_PI / spec.groups));
      group_center[0] = radius * std::cos(angle);
      group_center[1] = radius * std::sin(angle);
    }
    for (int b = 0; b < spec.blobs_per_group; ++b) {
      BlobSpec blob;
      blob.center = group_center;
      if (spec.blobs_per_group > 1) {
        const double angle = 2.0 * M_PI * b / spec.blobs_per_group;
        const double radius =
            spec.blob_separation / (2.0 * std::sin(M_PI / spec.blobs_per_group));
        blob.center[0] += radius * std::cos(angle);
        blob.center[1] += radius * std::sin(angle);
      }
      blob.count = spec.points_per_blob;
      blob.sigma = spec.sigma;
      blob.label = "blob" + std::to_string(g) + "_" + std::to_string(b);
      blobs.push_back(std::move(blob));
    }
  }

  SyntheticCorpus out;
  out.corpus = make_blobs(blobs, seed);
  out.fine_labels = out.corpus.labels;
  out.coarse_labels.reserve(out.fine_labels.size());
  for (int g = 0; g < spec.groups; ++g) {
    for (int b = 0; b < spec.blobs_per_group; ++b) {
      for (int p = 0; p < spec.points_per_blob; ++p) {
        out.coarse_labels.push_back("group" + std::to_string(g));
      }
    }
  }
  return out;
}

}  // namespace semtree
