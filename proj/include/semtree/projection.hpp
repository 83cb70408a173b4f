#pragma once

#include <Eigen/Core>

#include <string>

#include "semtree/errors.hpp"

namespace semtree {

enum class Metric { kL2, kCosine };

Metric metric_from_string(const std::string& name);
std::string to_string(Metric metric);

// Cosine distance 1 - u.v / (|u||v|), in [0, 2]. Throws on zero-norm input.
template <typename DerivedU, typename DerivedV>
double cosine_distance(const Eigen::MatrixBase<DerivedU>& u,
                       const Eigen::MatrixBase<DerivedV>& v) {
  if (u.size() != v.size()) throw DataError("cosine_distance: length mismatch");
  const double nu = u.template cast<double>().norm();
  const double nv = v.template cast<double>().norm();
  if (nu == 0.0 || nv == 0.0) throw DataError("cosine_distance: zero-norm input");
  const double dot = u.template cast<double>().dot(v.template cast<double>());
  return 1.0 - dot / (nu * nv);
}

// Euclidean distance. Throws on length mismatch.
template <typename DerivedU, typename DerivedV>
double l2_distance(const Eigen::MatrixBase<DerivedU>& u,
                   const Eigen::MatrixBase<DerivedV>& v) {
  if (u.size() != v.size()) throw DataError("l2_distance: length mismatch");
  return (u.template cast<double>() - v.template cast<double>()).norm();
}

// Mean-centered projection of an embedding matrix onto its top-k principal
// directions.
struct ProjectedSpace {
  int k = 0;
  Eigen::VectorXd mean;                // length d
  Eigen::MatrixXd components;          // k x d, orthonormal rows
  Eigen::MatrixXd projected;           // n x k
  Eigen::VectorXd explained_variance;  // length k, non-increasing, positive
};

// PCA via eigendecomposition of the sample covariance (denominator n-1),
// computed on whichever of the covariance or Gram matrix is smaller so that
// d up to 4096 stays tractable. Component signs are fixed so the
// largest-magnitude coordinate of each component is positive (ties broken by
// lowest index), making repeated runs identical.
//
// Requires 2 <= n, 1 <= k <= min(n-1, d). Throws DataError if fewer than k
// directions carry strictly positive variance.
ProjectedSpace compute_pca(const Eigen::Ref<const Eigen::MatrixXd>& matrix, int k);

}  // namespace semtree
