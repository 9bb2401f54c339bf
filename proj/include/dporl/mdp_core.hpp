#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "dporl/types.hpp"

namespace dporl {

/// Finite-horizon tabular MDP with time-inhomogeneous transitions.
/// P is [h][s][a][s'] row-major, r is [h][s][a], d1 is the initial
/// distribution. Mean rewards live in [0,1]; realized rewards are sampled
/// Bernoulli(r) so trajectories stay in [0,1] as well.
struct TabularMDP {
  int S = 0, A = 0, H = 0;
  std::vector<double> P;
  std::vector<double> r;
  std::vector<double> d1;

  std::size_t pidx(int h, int s, int a, int s2) const {
    return ((static_cast<std::size_t>(h) * S + s) * A + a) * S + s2;
  }
  std::size_t ridx(int h, int s, int a) const {
    return (static_cast<std::size_t>(h) * S + s) * A + a;
  }
  std::span<const double> row(int h, int s, int a) const {
    return {P.data() + pidx(h, s, a, 0), static_cast<std::size_t>(S)};
  }

  // Throws std::invalid_argument when dimensions or the stochasticity /
  // reward-range invariants are broken (tolerance 1e-12).
  void validate() const;
};

/// Linear MDP over a finite S x A grid: P_h(s'|s,a) = <phi(s,a), nu_h(s')>,
/// r_h(s,a) = <phi(s,a), theta_h>. The feature map is known to learners;
/// nu and theta are the hidden environment parameters.
struct LinearMDP {
  int S = 0, A = 0, H = 0, d = 0;
  std::vector<double> phi;    // [s][a][i]
  std::vector<double> nu;     // [h][s'][i]
  std::vector<double> theta;  // [h][i]
  std::vector<double> d1;

  std::span<const double> phi_at(int s, int a) const {
    return {phi.data() + (static_cast<std::size_t>(s) * A + a) * d,
            static_cast<std::size_t>(d)};
  }
  std::span<const double> nu_at(int h, int s2) const {
    return {nu.data() + (static_cast<std::size_t>(h) * S + s2) * d,
            static_cast<std::size_t>(d)};
  }
  std::span<const double> theta_at(int h) const {
    return {theta.data() + static_cast<std::size_t>(h) * d,
            static_cast<std::size_t>(d)};
  }
  double transition(int h, int s, int a, int s2) const;
  double reward(int h, int s, int a) const;
};

/// Marginal state-action occupancy d[h][s][a] of a policy, plus the coverage
/// diagnostics derived from it.
struct OccupancyTable {
  int S = 0, A = 0, H = 0;
  std::vector<double> d;  // [h][s][a]

  double at(int h, int s, int a) const {
    return d[(static_cast<std::size_t>(h) * S + s) * A + a];
  }
  // Smallest strictly positive entry across all steps (the d-bar_m coverage
  // constant). Returns 0 for an all-zero table.
  double min_positive() const;
  // State-action pairs visited with positive probability at step h.
  std::vector<std::pair<int, int>> trackable(int h) const;
};

struct PolicyEvaluation {
  double v = 0.0;
  std::vector<double> V;  // [h][s]
  std::vector<double> Q;  // [h][s][a]
};

struct OptimalSolution {
  Policy pi_star;
  double v_star = 0.0;
  std::vector<double> V_star;  // [h][s]
};

/// Checks the linear MDP constraints: every <phi, nu_h(s')> is a probability
/// (nonnegative entries, rows summing to 1) and every <phi, theta_h> lies in
/// [0,1], all at tolerance 1e-12. Returns one violation per offending entry.
ValidationReport validate_linear_mdp(const LinearMDP& lin);

/// Materializes the tabular model induced by a linear MDP. Negative transition
/// entries within -1e-12 are clipped to zero and the row renormalized; larger
/// violations (or any reported by validate_linear_mdp) are hard errors.
TabularMDP tabularize(const LinearMDP& lin);

/// Exact policy evaluation by backward induction:
/// Q_h = r_h + P_h V_{h+1}, V_h = <Q_h, pi_h>, V_{H+1} = 0, v = E_{d1}[V_1].
PolicyEvaluation exact_policy_value(const TabularMDP& mdp, const Policy& pi);

/// Optimal planning by backward induction with max over actions; argmax ties
/// break toward the lowest action index.
OptimalSolution solve_optimal(const TabularMDP& mdp);

/// Forward occupancy recursion from d1 under `pi`.
OccupancyTable occupancy(const TabularMDP& mdp, const Policy& pi);

/// Samples `count` i.i.d. trajectories under behavior policy `mu`. Rewards are
/// Bernoulli(r_h(s,a)). Pure function of (mdp, mu, count, seed).
Dataset sample_dataset(const TabularMDP& mdp, const Policy& mu,
                       std::int64_t count, std::uint64_t seed);

/// Monte-Carlo estimate of v^pi with its standard error; the independent
/// cross-check oracle for exact_policy_value.
std::pair<double, double> monte_carlo_value(const TabularMDP& mdp,
                                            const Policy& pi,
                                            std::int64_t rollouts,
                                            std::uint64_t seed);

}  // namespace dporl
