#include "semtree/projection.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <vector>

namespace semtree {

Metric metric_from_string(const std::string& name) {
  if (name == "l2") return Metric::kL2;
  if (name == "cosine") return Metric::kCosine;
  throw UsageError("unknown metric '" + name + "' (expected l2 or cosine)");
}

std::string to_string(Metric metric) {
  return metric == Metric::kL2 ? "l2" : "cosine";
}

namespace {

// Flips a component row in place so its largest-magnitude coordinate is
// positive; among equal magnitudes the lowest index decides.
void fix_sign(Eigen::Ref<Eigen::RowVectorXd> row, Eigen::Ref<Eigen::VectorXd> column) {
  Eigen::Index pivot = 0;
  double best = -1.0;
  for (Eigen::Index j = 0; j < row.size(); ++j) {
    const double mag = std::abs(row[j]);
    if (mag > best) {
      best = mag;
      pivot = j;
    }
  }
  if (row[pivot] < 0.0) {
    row = -row;
    column = -column;
  }
}

}  // namespace

ProjectedSpace compute_pca(const Eigen::Ref<const Eigen::MatrixXd>& matrix, int k) {
  const Eigen::Index n = matrix.rows();
  const Eigen::Index d = matrix.cols();
  if (n < 2) throw DataError("compute_pca: need at least 2 rows, got " + std::to_string(n));
  const Eigen::Index k_max = std::min<Eigen::Index>(n - 1, d);
  if (k < 1 || k > k_max) {
    throw UsageError("compute_pca: k=" + std::to_string(k) + " out of range [1, " +
                     std::to_string(k_max) + "]");
  }
  if (!matrix.allFinite()) throw DataError("compute_pca: non-finite input");

  ProjectedSpace space;
  space.k = k;
  space.mean = matrix.colwise().mean();
  const Eigen::MatrixXd centered = matrix.rowwise() - space.mean.transpose();

  Eigen::VectorXd eigenvalues;   // ascending, from the solver
  Eigen::MatrixXd directions;    // d x m candidate components, one per column

  if (d <= n) {
    const Eigen::MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw StageError("compute_pca: eigensolver failed");
    eigenvalues = solver.eigenvalues();
    directions = solver.eigenvectors();
  } else {
    // Gram-matrix route for wide matrices: same nonzero spectrum, and the
    // d-dimensional directions are recovered from the n-dimensional ones.
    const Eigen::MatrixXd gram = centered * centered.transpose() / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success) throw StageError("compute_pca: eigensolver failed");
    eigenvalues = solver.eigenvalues();
    directions.resize(d, eigenvalues.size());
    for (Eigen::Index j = 0; j < eigenvalues.size(); ++j) {
      directions.col(j) = centered.transpose() * solver.eigenvectors().col(j);
      const double norm = directions.col(j).norm();
      if (norm > 0.0) directions.col(j) /= norm;
    }
  }

  // Descending order, keeping only strictly positive variance directions.
  const Eigen::Index m = eigenvalues.size();
  const double lambda_max = std::max(0.0, eigenvalues[m - 1]);
  const double positive_floor = lambda_max * 1e-9;
  std::vector<Eigen::Index> order;
  order.reserve(m);
  for (Eigen::Index j = m - 1; j >= 0; --j) {
    if (eigenvalues[j] > positive_floor && eigenvalues[j] > 0.0) order.push_back(j);
  }
  if (static_cast<Eigen::Index>(order.size()) < k) {
    throw DataError("compute_pca: input has only " + std::to_string(order.size()) +
                    " positive-variance directions, fewer than k=" + std::to_string(k));
  }

  space.components.resize(k, d);
  space.explained_variance.resize(k);
  for (int j = 0; j < k; ++j) {
    space.components.row(j) = directions.col(order[j]).transpose();
    space.explained_variance[j] = eigenvalues[order[j]];
  }
  space.projected = centered * space.components.transpose();
  for (int j = 0; j < k; ++j) {
    fix_sign(space.components.row(j), space.projected.col(j));
  }
  return space;
}

}  // namespace semtree
