#include "dporl/regression.hpp"

#include <stdexcept>

namespace dporl {

Eigen::VectorXd spd_solve(GramAccumulator& acc, const Eigen::VectorXd& rhs) {
  const auto n = acc.M.rows();
  if (acc.M.cols() != n || rhs.size() != n)
    throw std::invalid_argument("spd_solve: dimension mismatch");
  double scale = std::max(1.0, acc.M.cwiseAbs().maxCoeff());
  if ((acc.M - acc.M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("spd_solve: matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(acc.M);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("spd_solve: eigendecomposition failed");
  Eigen::VectorXd evals = eig.eigenvalues();
  acc.clamped = evals.minCoeff() < acc.floor;
  if (acc.clamped) {
    evals = evals.cwiseMax(acc.floor);
    acc.M = eig.eigenvectors() * evals.asDiagonal() *
            eig.eigenvectors().transpose();
    // Re-symmetrize bitwise; the product above is symmetric only in exact
    // arithmetic.
    acc.M = ((acc.M + acc.M.transpose()) / 2.0).eval();
  }
  acc.min_eigenvalue = evals.minCoeff();
  return eig.eigenvectors() *
         (eig.eigenvectors().transpose() * rhs).cwiseQuotient(evals);
}

RidgeResult weighted_ridge(const std::vector<Eigen::VectorXd>& features,
                           const std::vector<double>& targets,
                           const std::vector<double>& weights, double lambda,
                           const Eigen::VectorXd& noise_vec,
                           const Eigen::MatrixXd& noise_mat) {
  if (features.size() != targets.size() || features.size() != weights.size())
    throw std::invalid_argument("weighted_ridge: sample arrays disagree");
  if (lambda <= 0.0)
    throw std::invalid_argument("weighted_ridge: lambda must be > 0");
  const Eigen::Index d = noise_vec.size() > 0
                             ? noise_vec.size()
                             : (features.empty() ? noise_mat.rows()
                                                 : features.front().size());
  if (d <= 0) throw std::invalid_argument("weighted_ridge: unknown dimension");

  RidgeResult res;
  res.acc.M = Eigen::MatrixXd::Identity(d, d) * lambda;
  res.acc.b = Eigen::VectorXd::Zero(d);
  res.acc.lambda = lambda;
  res.acc.floor = lambda;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].size() != d)
      throw std::invalid_argument("weighted_ridge: feature dimension mismatch");
    double inv_w = 1.0 / weights[i];
    res.acc.M.noalias() += inv_w * features[i] * features[i].transpose();
    res.acc.b.noalias() += inv_w * targets[i] * features[i];
  }
  if (noise_mat.size() > 0) {
    if (noise_mat.rows() != d || noise_mat.cols() != d)
      throw std::invalid_argument("weighted_ridge: noise matrix dimension");
    res.acc.M += noise_mat;
  }
  if (noise_vec.size() > 0) res.acc.b += noise_vec;
  res.w = spd_solve(res.acc, res.acc.b);
  return res;
}

}  // namespace dporl
