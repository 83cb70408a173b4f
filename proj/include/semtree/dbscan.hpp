#pragma once

#include <Eigen/Core>

#include "semtree/neighbor_index.hpp"

namespace semtree {

// Assignment value for points that belong to no cluster.
inline constexpr int kNoise = -1;

// One clustering pass: the radius it was produced at and a per-point cluster
// id (or kNoise). Cluster ids are dense, 0..cluster_count-1, numbered in
// order of discovery during the ascending-id scan.
struct ClusterLayer {
  int layer_index = -1;  // position among stored layers; -1 until stored
  double epsilon = 0.0;
  Eigen::VectorXi assignment;
  int cluster_count = 0;

  int noise_count() const {
    return static_cast<int>((assignment.array() == kNoise).count());
  }
};

// Classic DBSCAN over the index's point set. A point is core when its
// eps-neighborhood, counting the point itself, holds at least minpts points.
// Clusters grow from unlabeled core points in ascending id order with a FIFO
// expansion queue whose neighbor batches are sorted ascending, which pins
// the otherwise order-dependent assignment of shared border points.
//
// Core tests may run concurrently; the expansion sweep is sequential, so the
// result is identical regardless of thread count.
ClusterLayer dbscan(NeighborIndex& index, double epsilon, int minpts);

}  // namespace semtree
