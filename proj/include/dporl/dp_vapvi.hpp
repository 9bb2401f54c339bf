#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "dporl/mdp_core.hpp"
#include "dporl/regression.hpp"
#include "dporl/types.hpp"

namespace dporl {

/// Configuration of the variance-aware linear-MDP learner.
///
/// pessimism_mode selects the additive D/K term: `theory` instantiates the
/// full constant (dominates the signal at small scales), `empirical` drops it
/// and keeps only the elliptical bonus, which is what the simulation study
/// uses.
struct VapviConfig {
  double rho = 0.0;  // total zCDP budget; 0 = noiseless baseline
  double delta = 0.1;
  double lambda = 1.0;
  double c_bonus = 1.0;  // the universal constant C in front of sqrt(d)
  double c1 = 1.0, c2 = 1.0;  // constants inside the matrix-shift bound E
  double c_d = 1.0;           // multiplier on the additive D term
  bool split_data = false;
  enum class PessimismMode { theory, empirical };
  PessimismMode pessimism_mode = PessimismMode::empirical;
  // Feature-coverage constant kappa = min_h lambda_min(Sigma^p_h); required
  // (> 0) in theory mode, diagnostic otherwise.
  double kappa = 0.0;
};

/// Noise calibration constants of the private learner.
struct PessimismConstants {
  double rho0 = 0.0;   // per-release budget rho / (5H)
  double L = 0.0;      // high-probability bound on the vector noises
  double E = 0.0;      // diagonal shift of the noise matrices
  double kappa = 0.0;  // feature coverage used for D
  double D = 0.0;      // additive pessimism (0 in empirical or noiseless mode)
};

/// Computes rho0, L, E and D from the run parameters. Noiseless (rho = 0)
/// forces L = E = D = 0. Theory mode requires kappa > 0.
PessimismConstants compute_constants(int H, int d, double rho, double delta,
                                     double kappa, const VapviConfig& cfg);

/// Exact feature-coverage constant of a behavior policy on a linear MDP:
/// min over h of the smallest eigenvalue of
///   Sigma^p_h = sum_{s,a} d^mu_h(s,a) phi(s,a) phi(s,a)^T.
double feature_coverage_kappa(const LinearMDP& env, const Policy& mu);

/// Per-step noise draws of the private learner.
struct StepNoise {
  Eigen::VectorXd phi1, phi2, phi3;
  Eigen::MatrixXd k1, k2;
};

/// Private conditional-variance estimate for one step: ridge estimates of
/// E[V^2] and E[V] from the variance split, combined as
///   max{1, clip(<phi,beta>, [0,(H-h)^2]) - clip(<phi,theta>, [0,H-h])^2}
/// evaluated on the whole S x A grid (h is 0-based, so H-h is the remaining
/// value range). Returns the sigma^2 table [s][a].
std::vector<double> estimate_variance(const Dataset& data_prime,
                                      const LinearMDP& env,
                                      const std::vector<double>& v_next,
                                      double lambda, const StepNoise& noise,
                                      int h);

/// Differentially private variance-aware pessimistic value iteration on a
/// linear MDP. `data` feeds the weighted regression, `data_prime` the
/// variance estimate (the two may alias when the data is not split). The 5H
/// per-step releases each carry rho/(5H).
LearnedPolicy dp_vapvi(const Dataset& data, const Dataset& data_prime,
                       const LinearMDP& env, const VapviConfig& cfg,
                       std::uint64_t seed);

/// Non-private baseline: dp_vapvi with zero budget (all noises identically 0).
LearnedPolicy vapvi(const Dataset& data, const Dataset& data_prime,
                    const LinearMDP& env, VapviConfig cfg = {});

/// Pessimistic value iteration with unweighted ridge regression and the
/// dimension-scaled elliptical bonus beta = C d H sqrt(log(2dK/delta)); the
/// non-private reference point the variance-aware learners improve on.
LearnedPolicy pevi(const Dataset& data, const LinearMDP& env,
                   const VapviConfig& cfg);

}  // namespace dporl
