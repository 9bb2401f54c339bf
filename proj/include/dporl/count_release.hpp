#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dporl/privacy.hpp"
#include "dporl/types.hpp"

namespace dporl {

/// Visitation count tables: n_sa over (h,s,a) and n_sas over (h,s,a,s').
/// Raw counts are integral-valued; noisy and projected stages are real.
struct CountTables {
  int S = 0, A = 0, H = 0;
  std::vector<double> sa;   // [h][s][a]
  std::vector<double> sas;  // [h][s][a][s']

  std::size_t sa_idx(int h, int s, int a) const {
    return (static_cast<std::size_t>(h) * S + s) * A + a;
  }
  std::size_t sas_idx(int h, int s, int a, int s2) const {
    return sa_idx(h, s, a) * S + s2;
  }
  std::span<const double> sas_row(int h, int s, int a) const {
    return {sas.data() + sas_idx(h, s, a, 0), static_cast<std::size_t>(S)};
  }
};

/// Calibration of the count release: noise level and the high-probability
/// uniform noise bound that drives thresholds downstream.
struct ReleaseParams {
  privacy::PrivacyBudget budget;  // zCDP rho or pure-DP epsilon; 0 = noiseless
  double delta = 0.1;             // failure probability of the bound
  int S = 0, A = 0, H = 0;

  ReleaseParams() = default;
  ReleaseParams(privacy::PrivacyBudget b, double delta_, int S_, int A_, int H_);

  // Gaussian noise variance 2H/rho (zCDP path); 0 in noiseless mode.
  double sigma2() const;
  // Laplace scale 4H/eps (pure-DP path); 0 in noiseless mode.
  double laplace_scale() const;
  // Uniform bound on the injected noise:
  //   zCDP:    E = 4 sqrt(H log(4HS^2A/delta) / rho)
  //   pure DP: E = (4H/eps) log(4HS^2A/delta)
  // Exactly 0 in noiseless mode.
  double e_bound() const;
};

/// Exact tallies of the dataset. Throws on out-of-range indices.
CountTables raw_counts(const Dataset& data, int S, int A, int H);

/// Entrywise noised counts max(0, n + noise), Gaussian (zCDP, each of the two
/// count families charged rho/2) or Laplace (pure DP, one joint release).
/// Charges `acct` when provided. Noiseless mode returns the input unchanged.
CountTables noisy_counts(const CountTables& raw, const ReleaseParams& params,
                         Rng& rng, privacy::Accountant* acct = nullptr);

/// One projected (h,s,a) row of the consistency program.
struct ProjectedRow {
  std::vector<double> x;   // children, all >= 0
  double parent = 0.0;     // exactly sum(x)
  double objective = 0.0;  // achieved max_i |x_i - n'_i|
};

/// Minimizes max_{s'} |x_{s'} - n'_{s'}| subject to x >= 0 and
/// |sum(x) - parent_target| <= half_band. Feasibility of a candidate
/// objective t is monotone (achievable sums form the interval
/// [sum max(0, n'-t), sum(n'+t)]), so the optimum is found by bisection on t;
/// the minimizer then moves every coordinate evenly toward the admissible sum,
/// water-filling at zero when the sum must shrink. Among the optimal solutions
/// this even-residual choice is the documented, deterministic one.
ProjectedRow project_row(std::span<const double> noisy_children,
                         double parent_target, double half_band);

/// Applies project_row to every (h,s,a) and rebuilds parents as exact child
/// sums, yielding the consistent private counts.
CountTables consistent_counts(const CountTables& noisy, double e_bound);

/// Private transition kernel: empirical ratio where the projected parent count
/// clears e_bound, uniform 1/S elsewhere. Returned [h][s][a][s'] row-major.
std::vector<double> private_kernel(const CountTables& consistent, double e_bound);

}  // namespace dporl
