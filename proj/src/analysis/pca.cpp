#include "latmdp/analysis/pca.hpp"

#include <iostream>
#include <stdexcept>

namespace latmdp::analysis {

PcaResult pca_project(const MatrixXd& data_rows, int n_components) {
  const Eigen::Index n = data_rows.rows();
  const Eigen::Index d = data_rows.cols();
  if (n < 1 || d < 1) throw std::invalid_argument("pca_project: empty data");
  if (n_components < 1 || n_components > d)
    throw std::invalid_argument("pca_project: n_components out of range");

  PcaResult out;
  out.mean = data_rows.colwise().mean();
  MatrixXd centered = data_rows.rowwise() - out.mean.transpose();
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  MatrixXd cov = centered.transpose() * centered / denom;

  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw std::runtime_error("pca_project: eigensolver failed");

  // Eigenvalues come sorted ascending; walk from the back.
  const VectorXd evals = eig.eigenvalues();
  const double total = std::max(evals.sum(), 0.0);
  const double rank_tol = 1e-12 * std::max(1.0, evals.cwiseAbs().maxCoeff());
  int kept = 0;
  MatrixXd comps(d, n_components);
  VectorXd vars(n_components);
  for (int i = 0; i < n_components; ++i) {
    const Eigen::Index src = d - 1 - i;
    if (evals[src] <= rank_tol) break;
    comps.col(kept) = eig.eigenvectors().col(src);
    // Sign convention: largest-magnitude loading positive.
    Eigen::Index arg = 0;
    comps.col(kept).cwiseAbs().maxCoeff(&arg);
    if (comps(arg, kept) < 0) comps.col(kept) = -comps.col(kept);
    vars[kept] = evals[src];
    ++kept;
  }
  if (kept < n_components) {
    out.rank_deficient = true;
    std::cerr << "warning: pca_project kept " << kept << " of " << n_components
              << " requested components (rank deficiency)\n";
  }
  if (kept == 0) {
    out.zero_variance = true;
    std::cerr << "warning: pca_project input has zero variance\n";
    out.components = MatrixXd::Zero(d, 0);
    out.projected = MatrixXd::Zero(n, 0);
    out.explained_variance = VectorXd::Zero(0);
    out.explained_variance_ratio = VectorXd::Zero(0);
    return out;
  }
  out.components = comps.leftCols(kept);
  out.explained_variance = vars.head(kept);
  out.explained_variance_ratio =
      total > 0 ? (vars.head(kept) / total).eval() : VectorXd::Zero(kept).eval();
  out.projected = centered * out.components;
  return out;
}

MatrixXd pca_reconstruct(const PcaResult& pca) {
  MatrixXd rec = pca.projected * pca.components.transpose();
  rec.rowwise() += pca.mean.transpose();
  return rec;
}

}  // namespace latmdp::analysis
