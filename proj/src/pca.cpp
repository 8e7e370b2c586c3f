#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "calorie/features.hpp"

namespace calorie::features {

PcaModel pca_fit(const Eigen::MatrixXd& samples, const PcaParams& params) {
  require(samples.rows() >= 2, "pca_fit: need at least two samples");
  require(params.var_target > 0.0 && params.var_target <= 1.0, "pca_fit: var_target must be in (0, 1]");
  const Eigen::Index n = samples.rows();
  const Eigen::Index dim = samples.cols();

  PcaModel model;
  model.mean = samples.colwise().mean().transpose();
  const Eigen::MatrixXd centered = samples.rowwise() - model.mean.transpose();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
  cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(), 1.0 / static_cast<double>(n - 1));
  cov = cov.selfadjointView<Eigen::Lower>();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw Error("pca_fit: eigendecomposition failed");

  // Eigen returns ascending order.
  Eigen::VectorXd values = solver.eigenvalues().reverse().cwiseMax(0.0);
  Eigen::MatrixXd vectors = solver.eigenvectors().rowwise().reverse();
  model.total_variance = values.sum();

  const double largest = values.size() > 0 ? values(0) : 0.0;
  if (!(model.total_variance > 0.0) || largest <= 1e-300) {
    model.degenerate = true;
    model.basis = Eigen::MatrixXd(0, dim);
    model.explained_variance = Eigen::VectorXd(0);
    return model;
  }

  Eigen::Index rank = 0;
  while (rank < values.size() && values(rank) > largest * 1e-10) ++rank;

  Eigen::Index reach = 0;
  double cumulative = 0.0;
  const double target = params.var_target * model.total_variance * (1.0 - 1e-12);
  while (reach < values.size()) {
    cumulative += values(reach++);
    if (cumulative >= target) break;
  }

  const Eigen::Index k =
      std::min({static_cast<Eigen::Index>(params.max_k), reach, rank});
  model.basis = vectors.leftCols(k).transpose();
  model.explained_variance = values.head(k);

  // Deterministic sign: the largest-magnitude entry of every component is positive.
  for (Eigen::Index i = 0; i < k; ++i) {
    Eigen::Index arg = 0;
    model.basis.row(i).cwiseAbs().maxCoeff(&arg);
    if (model.basis(i, arg) < 0.0) model.basis.row(i) *= -1.0;
  }
  return model;
}

Eigen::VectorXd pca_project(const PcaModel& model, const Eigen::VectorXd& x) {
  require(x.size() == model.mean.size(), "pca_project: length mismatch");
  return model.basis * (x - model.mean);
}

Eigen::VectorXd pca_reconstruct(const PcaModel& model, const Eigen::VectorXd& coords) {
  require(coords.size() == model.basis.rows(), "pca_reconstruct: length mismatch");
  return model.mean + model.basis.transpose() * coords;
}

}  // namespace calorie::features
