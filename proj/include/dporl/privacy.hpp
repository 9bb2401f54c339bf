#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dporl/rng.hpp"

namespace dporl::privacy {

enum class BudgetKind { zcdp, pure_dp, approx_dp };

/// Privacy budget. Value 0 means noiseless mode: every mechanism becomes the
/// identity, so private algorithms degenerate exactly to their non-private
/// baselines.
struct PrivacyBudget {
  BudgetKind kind = BudgetKind::zcdp;
  double rho = 0.0;      // zCDP
  double epsilon = 0.0;  // pure / approx DP
  double delta = 0.0;    // approx DP only

  static PrivacyBudget zcdp(double rho);
  static PrivacyBudget pure_dp(double epsilon);
  static PrivacyBudget approx_dp(double epsilon, double delta);
  bool noiseless() const;
};

struct Release {
  std::string name;
  double sensitivity = 0.0;
  double budget = 0.0;  // rho for zCDP releases, epsilon for pure-DP ones
  double sigma = 0.0;   // noise std-dev (or Laplace scale)
};

/// Per-run ledger of declared private releases. Algorithms charge every noise
/// draw here and assert the total equals the configured budget on exit, which
/// makes the composition bookkeeping machine-checkable.
class Accountant {
 public:
  void charge(std::string name, double sensitivity, double budget, double sigma);
  double total() const;
  std::size_t release_count() const { return releases_.size(); }
  const std::vector<Release>& releases() const { return releases_; }
  // Throws std::logic_error when |total - expected| > 1e-9 * max(1, expected).
  void expect_total(double expected) const;
  std::string to_text() const;

 private:
  std::vector<Release> releases_;
};

/// Gaussian mechanism under zCDP: adds N(0, sigma^2) with sigma^2 =
/// delta2^2 / (2 rho). rho == 0 returns the input unchanged with sigma 0.
/// Returns the noised vector and the sigma used.
std::pair<std::vector<double>, double> gaussian_mechanism(
    std::span<const double> x, double delta2, double rho, Rng& rng);
std::pair<std::vector<double>, double> gaussian_mechanism(
    std::span<const double> x, double delta2, double rho, std::uint64_t seed);

/// Laplace mechanism: adds Lap(delta1/eps) noise per coordinate. eps == 0 is a
/// passthrough.
std::vector<double> laplace_mechanism(std::span<const double> x, double delta1,
                                      double eps, Rng& rng);
std::vector<double> laplace_mechanism(std::span<const double> x, double delta1,
                                      double eps, std::uint64_t seed);

double laplace_sample(double scale, Rng& rng);

/// Additive zCDP composition.
double compose_zcdp(std::span<const double> budgets);

/// zCDP -> approximate DP: eps = rho + 2 sqrt(rho log(1/delta)).
double zcdp_to_approx_dp(double rho, double delta);

/// Shifted symmetric Gaussian noise matrix K = (shift/2) I + (Z + Z^T)/sqrt(2)
/// with Z_ij iid N(0, 1/(4 rho0)). rho0 == 0 yields the pure diagonal shift.
struct NoiseMatrixSpec {
  int d = 1;
  double rho0 = 0.0;
  double shift = 0.0;  // the E of the shifted-matrix construction
};

// Row-major d x d matrix, exactly symmetric by construction.
std::vector<double> symmetric_noise_matrix(const NoiseMatrixSpec& spec, Rng& rng);
std::vector<double> symmetric_noise_matrix(const NoiseMatrixSpec& spec,
                                           std::uint64_t seed);

}  // namespace dporl::privacy
