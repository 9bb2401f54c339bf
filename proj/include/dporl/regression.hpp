#pragma once

#include <Eigen/Dense>
#include <vector>

namespace dporl {

/// Accumulated (possibly noised) Gram system M w = b with a ridge term and an
/// eigenvalue floor. M must stay symmetric; if noise pushes its smallest
/// eigenvalue below the floor, spd_solve clamps the spectrum up before
/// solving and records that it did.
struct GramAccumulator {
  Eigen::MatrixXd M;
  Eigen::VectorXd b;
  double lambda = 1.0;
  double floor = 1.0;

  // Filled in by spd_solve.
  double min_eigenvalue = 0.0;  // after conditioning
  bool clamped = false;
};

/// Solves M x = rhs for symmetric M, clamping eigenvalues up to acc.floor
/// first when needed. Throws std::invalid_argument if M is not symmetric
/// within 1e-12 (relative to its largest entry).
Eigen::VectorXd spd_solve(GramAccumulator& acc, const Eigen::VectorXd& rhs);

/// Variance-weighted ridge regression with optional additive noise:
///   w = (sum_i phi_i phi_i^T / w_i + lambda I + noise_mat)^-1
///       (sum_i phi_i y_i / w_i + noise_vec).
/// weights are the per-sample variances (>= 1 upstream); pass empty noise
/// terms for the exact non-private path.
struct RidgeResult {
  Eigen::VectorXd w;
  GramAccumulator acc;
};

RidgeResult weighted_ridge(const std::vector<Eigen::VectorXd>& features,
                           const std::vector<double>& targets,
                           const std::vector<double>& weights, double lambda,
                           const Eigen::VectorXd& noise_vec,
                           const Eigen::MatrixXd& noise_mat);

}  // namespace dporl
