#pragma once

#include <Eigen/Dense>

namespace latmdp::analysis {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct PcaResult {
  MatrixXd components;                // d x k, orthonormal columns
  MatrixXd projected;                 // n x k
  VectorXd explained_variance;        // k
  VectorXd explained_variance_ratio;  // k, fractions of total variance
  VectorXd mean;                      // d
  bool rank_deficient = false;        // fewer components than requested
  bool zero_variance = false;
};

/// Mean-centered PCA via eigendecomposition of the covariance matrix.
/// Deterministic sign convention: the largest-magnitude loading of each
/// component is positive. Rank-deficient inputs yield fewer components.
PcaResult pca_project(const MatrixXd& data_rows, int n_components);

/// Inverse map: projected * components^T + mean.
MatrixXd pca_reconstruct(const PcaResult& pca);

}  // namespace latmdp::analysis
