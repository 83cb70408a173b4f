#pragma once

#include <Eigen/Core>

#include <atomic>
#include <cstdint>
#include <vector>

#include "semtree/projection.hpp"

namespace semtree {

// Work counters for neighborhood queries. points_examined counts candidate
// touches (distance evaluations plus enumeration of fully-covered subtrees);
// points_returned counts emitted neighbor ids.
struct QueryStats {
  std::uint64_t queries = 0;
  std::uint64_t points_examined = 0;
  std::uint64_t points_returned = 0;
};

// Exact radius-neighbor search over a fixed point set. Every query is
// boundary-inclusive: j is a neighbor of i iff dist(i, j) <= eps, and i is
// its own neighbor. L2 comparisons are made on squared distances.
//
// For the L2 metric in up to 16 dimensions queries run on a kd-tree with
// bounding-box pruning; cosine and higher-dimensional L2 fall back to a
// linear scan. The structure is built once and reused across all epsilon
// passes of a tree build.
//
// The "active" machinery supports the clustering sweep: points can be
// deactivated as they are labeled, and active_within() then enumerates only
// the remaining candidates, keeping the per-pass work near-linear even at
// radii where every neighborhood spans the whole set.
class NeighborIndex {
 public:
  NeighborIndex(const Eigen::Ref<const Eigen::MatrixXd>& points, Metric metric);

  NeighborIndex(const NeighborIndex&) = delete;
  NeighborIndex& operator=(const NeighborIndex&) = delete;

  Eigen::Index size() const { return points_.rows(); }
  Eigen::Index dim() const { return points_.cols(); }
  Metric metric() const { return metric_; }
  bool uses_spatial_tree() const { return !nodes_.empty(); }
  Eigen::VectorXd point(int i) const { return points_.row(i).transpose(); }

  // All neighbors of point i within eps (self-inclusive), ascending ids.
  // Ignores the active flags. Thread-safe.
  std::vector<int> range_query(int i, double eps) const;

  // Number of neighbors of point i within eps, stopping early once cap is
  // reached (returns cap in that case). Ignores active flags. Thread-safe.
  int count_within(int i, double eps, int cap) const;

  // Sweep support; not thread-safe against each other.
  void reset_active();
  void deactivate(int i);
  bool is_active(int i) const { return active_[static_cast<size_t>(i)] != 0; }
  // Active neighbors of point i within eps, ascending ids, appended to out
  // (out is cleared first).
  void active_within(int i, double eps, std::vector<int>& out) const;

  QueryStats stats() const;
  void reset_stats();

 private:
  struct Node {
    int left = -1;
    int right = -1;
    int parent = -1;
    int begin = 0;  // range into order_, leaves only hold points directly
    int end = 0;
    int active_count = 0;
    int split_dim = -1;
  };

  using RowMatrixXd =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  void build_tree();
  int build_node(int begin, int end, int parent);
  double min_sq_dist_to_box(int node, const double* q) const;
  double max_sq_dist_to_box(int node, const double* q) const;
  double sq_dist(int a, const double* q) const;

  template <bool ActiveOnly>
  void collect_within(int node, const double* q, double eps_sq, std::vector<int>& out) const;
  void append_range(int node, bool active_only, std::vector<int>& out) const;

  RowMatrixXd points_;  // row-major copy; normalized rows under cosine
  Metric metric_;

  // kd-tree storage (L2, dim <= 16 only)
  std::vector<Node> nodes_;
  std::vector<int> order_;    // permutation of ids; leaf ranges are contiguous
  std::vector<int> leaf_of_;  // point id -> leaf node
  std::vector<double> box_min_;  // nodes x dim, flattened
  std::vector<double> box_max_;

  std::vector<char> active_;
  int active_total_ = 0;

  mutable std::atomic<std::uint64_t> stat_queries_{0};
  mutable std::atomic<std::uint64_t> stat_examined_{0};
  mutable std::atomic<std::uint64_t> stat_returned_{0};

  static constexpr int kLeafSize = 32;
  static constexpr Eigen::Index kMaxTreeDim = 16;
};

}  // namespace semtree
