#include "semtree/neighbor_index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "semtree/errors.hpp"

namespace semtree {

NeighborIndex::NeighborIndex(const Eigen::Ref<const Eigen::MatrixXd>& points, Metric metric)
    : points_(points), metric_(metric) {
  if (points_.rows() == 0) throw DataError("NeighborIndex: empty point set");
  if (points_.cols() == 0) throw DataError("NeighborIndex: zero-dimensional points");
  if (!points_.allFinite()) throw DataError("NeighborIndex: non-finite coordinates");

  if (metric_ == Metric::kCosine) {
    for (Eigen::Index i = 0; i < points_.rows(); ++i) {
      const double norm = points_.row(i).norm();
      if (norm == 0.0) {
        throw DataError("NeighborIndex: zero-norm row " + std::to_string(i) +
                        " is invalid under the cosine metric");
      }
      points_.row(i) /= norm;
    }
  }

  active_.assign(static_cast<size_t>(points_.rows()), 1);
  active_total_ = static_cast<int>(points_.rows());

  if (metric_ == Metric::kL2 && points_.cols() <= kMaxTreeDim) {
    build_tree();
  }
}

void NeighborIndex::build_tree() {
  const int n = static_cast<int>(points_.rows());
  order_.resize(static_cast<size_t>(n));
  std::iota(order_.begin(), order_.end(), 0);
  leaf_of_.assign(static_cast<size_t>(n), -1);
  nodes_.reserve(static_cast<size_t>(2 * (n / kLeafSize + 2)));
  build_node(0, n, -1);
  for (size_t node = 0; node < nodes_.size(); ++node) {
    if (nodes_[node].left < 0) {
      for (int i = nodes_[node].begin; i < nodes_[node].end; ++i) {
        leaf_of_[static_cast<size_t>(order_[static_cast<size_t>(i)])] = static_cast<int>(node);
      }
    }
  }
}

int NeighborIndex::build_node(int begin, int end, int parent) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  const Eigen::Index dim = points_.cols();
  box_min_.resize(nodes_.size() * static_cast<size_t>(dim));
  box_max_.resize(nodes_.size() * static_cast<size_t>(dim));

  double* lo = &box_min_[static_cast<size_t>(id) * static_cast<size_t>(dim)];
  double* hi = &box_max_[static_cast<size_t>(id) * static_cast<size_t>(dim)];
  for (Eigen::Index c = 0; c < dim; ++c) {
    lo[c] = std::numeric_limits<double>::infinity();
    hi[c] = -std::numeric_limits<double>::infinity();
  }
  for (int i = begin; i < end; ++i) {
    const double* row = points_.row(order_[static_cast<size_t>(i)]).data();
    for (Eigen::Index c = 0; c < dim; ++c) {
      lo[c] = std::min(lo[c], row[c]);
      hi[c] = std::max(hi[c], row[c]);
    }
  }

  nodes_[id].parent = parent;
  nodes_[id].begin = begin;
  nodes_[id].end = end;
  nodes_[id].active_count = end - begin;

  const int count = end - begin;
  int widest = 0;
  double spread = -1.0;
  for (Eigen::Index c = 0; c < dim; ++c) {
    const double s = hi[c] - lo[c];
    if (s > spread) {
      spread = s;
      widest = static_cast<int>(c);
    }
  }
  if (count <= kLeafSize || spread <= 0.0) {
    return id;  // leaf; spread 0 means all points coincide
  }

  const int mid = begin + count / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) { return points_(a, widest) < points_(b, widest); });
  nodes_[id].split_dim = widest;
  const int left = build_node(begin, mid, id);
  nodes_[id].left = left;
  const int right = build_node(mid, end, id);
  nodes_[id].right = right;
  return id;
}

double NeighborIndex::min_sq_dist_to_box(int node, const double* q) const {
  const Eigen::Index dim = points_.cols();
  const double* lo = &box_min_[static_cast<size_t>(node) * static_cast<size_t>(dim)];
  const double* hi = &box_max_[static_cast<size_t>(node) * static_cast<size_t>(dim)];
  double acc = 0.0;
  for (Eigen::Index c = 0; c < dim; ++c) {
    double delta = 0.0;
    if (q[c] < lo[c]) delta = lo[c] - q[c];
    else if (q[c] > hi[c]) delta = q[c] - hi[c];
    acc += delta * delta;
  }
  return acc;
}

double NeighborIndex::max_sq_dist_to_box(int node, const double* q) const {
  const Eigen::Index dim = points_.cols();
  const double* lo = &box_min_[static_cast<size_t>(node) * static_cast<size_t>(dim)];
  const double* hi = &box_max_[static_cast<size_t>(node) * static_cast<size_t>(dim)];
  double acc = 0.0;
  for (Eigen::Index c = 0; c < dim; ++c) {
    const double delta = std::max(std::abs(q[c] - lo[c]), std::abs(q[c] - hi[c]));
    acc += delta * delta;
  }
  return acc;
}

double NeighborIndex::sq_dist(int a, const double* q) const {
  const double* row = points_.row(a).data();
  const Eigen::Index dim = points_.cols();
  double acc = 0.0;
  for (Eigen::Index c = 0; c < dim; ++c) {
    const double delta = row[c] - q[c];
    acc += delta * delta;
  }
  return acc;
}

void NeighborIndex::append_range(int node, bool active_only, std::vector<int>& out) const {
  const Node& nd = nodes_[static_cast<size_t>(node)];
  if (nd.left < 0) {
    for (int i = nd.begin; i < nd.end; ++i) {
      const int id = order_[static_cast<size_t>(i)];
      if (!active_only || active_[static_cast<size_t>(id)]) out.push_back(id);
    }
    stat_examined_.fetch_add(static_cast<std::uint64_t>(nd.end - nd.begin),
                             std::memory_order_relaxed);
    return;
  }
  if (!active_only || nodes_[static_cast<size_t>(nd.left)].active_count > 0) {
    append_range(nd.left, active_only, out);
  }
  if (!active_only || nodes_[static_cast<size_t>(nd.right)].active_count > 0) {
    append_range(nd.right, active_only, out);
  }
}

template <bool ActiveOnly>
void NeighborIndex::collect_within(int node, const double* q, double eps_sq,
                                   std::vector<int>& out) const {
  const Node& nd = nodes_[static_cast<size_t>(node)];
  if (ActiveOnly && nd.active_count == 0) return;
  if (min_sq_dist_to_box(node, q) > eps_sq) return;
  if (max_sq_dist_to_box(node, q) <= eps_sq) {
    append_range(node, ActiveOnly, out);
    return;
  }
  if (nd.left < 0) {
    stat_examined_.fetch_add(static_cast<std::uint64_t>(nd.end - nd.begin),
                             std::memory_order_relaxed);
    for (int i = nd.begin; i < nd.end; ++i) {
      const int id = order_[static_cast<size_t>(i)];
      if (ActiveOnly && !active_[static_cast<size_t>(id)]) continue;
      if (sq_dist(id, q) <= eps_sq) out.push_back(id);
    }
    return;
  }
  collect_within<ActiveOnly>(nd.left, q, eps_sq, out);
  collect_within<ActiveOnly>(nd.right, q, eps_sq, out);
}

std::vector<int> NeighborIndex::range_query(int i, double eps) const {
  stat_queries_.fetch_add(1, std::memory_order_relaxed);
  std::vector<int> out;
  const Eigen::Index n = points_.rows();
  if (uses_spatial_tree()) {
    collect_within<false>(0, points_.row(i).data(), eps * eps, out);
  } else if (metric_ == Metric::kL2) {
    const double eps_sq = eps * eps;
    stat_examined_.fetch_add(static_cast<std::uint64_t>(n), std::memory_order_relaxed);
    for (Eigen::Index j = 0; j < n; ++j) {
      if ((points_.row(j) - points_.row(i)).squaredNorm() <= eps_sq) {
        out.push_back(static_cast<int>(j));
      }
    }
  } else {
    // Rows are unit-normalized, so 0.5*|u-v|^2 == 1 - u.v exactly in math
    // and yields an exact 0 for identical rows in floating point.
    stat_examined_.fetch_add(static_cast<std::uint64_t>(n), std::memory_order_relaxed);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (0.5 * (points_.row(j) - points_.row(i)).squaredNorm() <= eps) {
        out.push_back(static_cast<int>(j));
      }
    }
  }
  std::sort(out.begin(), out.end());
  stat_returned_.fetch_add(out.size(), std::memory_order_relaxed);
  return out;
}

int NeighborIndex::count_within(int i, double eps, int cap) const {
  stat_queries_.fetch_add(1, std::memory_order_relaxed);
  const Eigen::Index n = points_.rows();
  int count = 0;
  if (uses_spatial_tree()) {
    const double eps_sq = eps * eps;
    const double* q = points_.row(i).data();
    // iterative DFS with early exit once cap neighbors are known
    std::vector<int> stack{0};
    std::uint64_t examined = 0;
    while (!stack.empty() && count < cap) {
      const int node = stack.back();
      stack.pop_back();
      const Node& nd = nodes_[static_cast<size_t>(node)];
      if (min_sq_dist_to_box(node, q) > eps_sq) continue;
      if (max_sq_dist_to_box(node, q) <= eps_sq) {
        count += nd.end - nd.begin;
        continue;
      }
      if (nd.left < 0) {
        examined += static_cast<std::uint64_t>(nd.end - nd.begin);
        for (int t = nd.begin; t < nd.end && count < cap; ++t) {
          if (sq_dist(order_[static_cast<size_t>(t)], q) <= eps_sq) ++count;
        }
        continue;
      }
      stack.push_back(nd.right);
      stack.push_back(nd.left);
    }
    stat_examined_.fetch_add(examined, std::memory_order_relaxed);
  } else if (metric_ == Metric::kL2) {
    const double eps_sq = eps * eps;
    Eigen::Index j = 0;
    for (; j < n && count < cap; ++j) {
      if ((points_.row(j) - points_.row(i)).squaredNorm() <= eps_sq) ++count;
    }
    stat_examined_.fetch_add(static_cast<std::uint64_t>(j), std::memory_order_relaxed);
  } else {
    Eigen::Index j = 0;
    for (; j < n && count < cap; ++j) {
      if (0.5 * (points_.row(j) - points_.row(i)).squaredNorm() <= eps) ++count;
    }
    stat_examined_.fetch_add(static_cast<std::uint64_t>(j), std::memory_order_relaxed);
  }
  return std::min(count, cap);
}

void NeighborIndex::reset_active() {
  std::fill(active_.begin(), active_.end(), static_cast<char>(1));
  active_total_ = static_cast<int>(points_.rows());
  for (auto& node : nodes_) node.active_count = node.end - node.begin;
}

void NeighborIndex::deactivate(int i) {
  if (!active_[static_cast<size_t>(i)]) return;
  active_[static_cast<size_t>(i)] = 0;
  --active_total_;
  if (!nodes_.empty()) {
    for (int node = leaf_of_[static_cast<size_t>(i)]; node >= 0;
         node = nodes_[static_cast<size_t>(node)].parent) {
      --nodes_[static_cast<size_t>(node)].active_count;
    }
  }
}

void NeighborIndex::active_within(int i, double eps, std::vector<int>& out) const {
  stat_queries_.fetch_add(1, std::memory_order_relaxed);
  out.clear();
  if (active_total_ == 0) return;
  const Eigen::Index n = points_.rows();
  if (uses_spatial_tree()) {
    collect_within<true>(0, points_.row(i).data(), eps * eps, out);
    std::sort(out.begin(), out.end());
  } else if (metric_ == Metric::kL2) {
    const double eps_sq = eps * eps;
    stat_examined_.fetch_add(static_cast<std::uint64_t>(n), std::memory_order_relaxed);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (active_[static_cast<size_t>(j)] &&
          (points_.row(j) - points_.row(i)).squaredNorm() <= eps_sq) {
        out.push_back(static_cast<int>(j));
      }
    }
  } else {
    stat_examined_.fetch_add(static_cast<std::uint64_t>(n), std::memory_order_relaxed);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (active_[static_cast<size_t>(j)] &&
          0.5 * (points_.row(j) - points_.row(i)).squaredNorm() <= eps) {
        out.push_back(static_cast<int>(j));
      }
    }
  }
  stat_returned_.fetch_add(out.size(), std::memory_order_relaxed);
}

QueryStats NeighborIndex::stats() const {
  QueryStats s;
  s.queries = stat_queries_.load(std::memory_order_relaxed);
  s.points_examined = stat_examined_.load(std::memory_order_relaxed);
  s.points_returned = stat_returned_.load(std::memory_order_relaxed);
  return s;
}

void NeighborIndex::reset_stats() {
  stat_queries_.store(0, std::memory_order_relaxed);
  stat_examined_.store(0, std::memory_order_relaxed);
  stat_returned_.store(0, std::memory_order_relaxed);
}

}  // namespace semtree
