#include "semtree/dbscan.hpp"

#include <deque>
#include <thread>
#include <vector>

#include "semtree/errors.hpp"

namespace semtree {

namespace {

std::vector<char> core_flags(const NeighborIndex& index, double epsilon, int minpts) {
  const int n = static_cast<int>(index.size());
  std::vector<char> core(static_cast<size_t>(n), 0);

  const unsigned hw = std::thread::hardware_concurrency();
  const int workers = static_cast<int>(std::min<unsigned>(hw == 0 ? 1 : hw, 32));
  if (workers <= 1 || n < 2048) {
    for (int i = 0; i < n; ++i) {
      core[static_cast<size_t>(i)] = index.count_within(i, epsilon, minpts) >= minpts;
    }
    return core;
  }

  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  const int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int begin = w * chunk;
    const int end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      for (int i = begin; i < end; ++i) {
        core[static_cast<size_t>(i)] = index.count_within(i, epsilon, minpts) >= minpts;
      }
    });
  }
  for (auto& t : pool) t.join();
  return core;
}

}  // namespace

ClusterLayer dbscan(NeighborIndex& index, double epsilon, int minpts) {
  if (epsilon <= 0.0) throw UsageError("dbscan: epsilon must be positive");
  if (minpts < 1) throw UsageError("dbscan: minpts must be >= 1");

  const int n = static_cast<int>(index.size());
  const std::vector<char> core = core_flags(index, epsilon, minpts);

  ClusterLayer layer;
  layer.epsilon = epsilon;
  layer.assignment = Eigen::VectorXi::Constant(n, kNoise);

  index.reset_active();
  int next_cluster = 0;
  std::deque<int> queue;
  std::vector<int> neighbors;

  for (int seed = 0; seed < n; ++seed) {
    if (!core[static_cast<size_t>(seed)] || layer.assignment[seed] != kNoise) continue;
    layer.assignment[seed] = next_cluster;
    index.deactivate(seed);
    queue.assign(1, seed);
    while (!queue.empty()) {
      const int p = queue.front();
      queue.pop_front();
      index.active_within(p, epsilon, neighbors);
      for (int q : neighbors) {
        layer.assignment[q] = next_cluster;
        index.deactivate(q);
        if (core[static_cast<size_t>(q)]) queue.push_back(q);
      }
    }
    ++next_cluster;
  }
  layer.cluster_count = next_cluster;
  return layer;
}

}  // namespace semtree
