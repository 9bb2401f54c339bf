#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dporl/dp_apvi.hpp"
#include "dporl/dp_vapvi.hpp"
#include "dporl/mdp_core.hpp"

namespace dporl {

/// Synthetic two-state, hundred-action linear MDP with d = 10: features are
/// the 8-bit binary action encoding plus the (delta, 1-delta) indicator pair,
/// transitions and rewards are drawn uniformly per step, and the initial
/// distribution is uniform. Always passes validate_linear_mdp.
LinearMDP build_appendix_f_mdp(int H, std::uint64_t seed);

/// Behavior policy of the synthetic environment: action 0 with probability p,
/// every other action with probability (1-p)/(A-1), identically across steps
/// and states.
Policy behavior_policy_appendix_f(double p, int H, int S, int A);

/// i.i.d.-uniform random tabular MDP (Dirichlet-like rows via normalized
/// exponentials, uniform rewards) for self-consistency experiments.
TabularMDP random_tabular_mdp(int S, int A, int H, std::uint64_t seed);

/// e-greedy mixture of the optimal policy: pi*(s) with probability 1-eps,
/// uniform otherwise. A fully covering behavior policy for tabular runs.
Policy eps_greedy_behavior(const TabularMDP& mdp, double eps);

/// Environment-side diagnostic: the largest normalized Bellman residual range
///   max_{h,s,a,s': P>0} |r_h(s,a) + V*(s') - Q*(s,a)| / max{1, sd_P(V*)}
/// witnessed by the optimal value function.
double xi_diagnostic(const TabularMDP& mdp);

struct ExperimentConfig {
  enum class Env { appendix_f, random_tabular, file };
  Env env = Env::appendix_f;
  std::string env_path;   // Env::file
  int H = 20, S = 3, A = 2;
  std::uint64_t env_seed = 1;

  // Algorithms by name: vapvi, dp-vapvi, pevi (linear); apvi, dp-apvi
  // (tabular). dp-* algorithms run once per rho grid point.
  std::vector<std::string> algorithms{"vapvi", "dp-vapvi", "pevi"};
  std::vector<std::int64_t> k_grid{5, 10, 25, 50, 100, 250, 500, 1000};
  std::vector<double> rho_grid{0.1, 1.0, 10.0};
  int seeds = 5;
  std::uint64_t master_seed = 1;
  int jobs = 1;

  double behavior_p = 0.6;        // appendix_f behavior policy
  double behavior_eps = 0.3;      // tabular e-greedy behavior
  // When set, dp-apvi releases counts under Laplace/pure DP and the budget
  // grid is read as epsilon values instead of rho.
  bool pure_dp = false;
  VapviConfig vapvi;              // shared by vapvi/dp-vapvi/pevi
  ApviConfig apvi;                // shared by apvi/dp-apvi
};

struct ResultRow {
  std::string alg;
  std::string env;
  int H = 0;
  std::int64_t K = 0;
  double rho = 0.0;  // +inf for non-private algorithms
  std::uint64_t seed = 0;
  double subopt = 0.0;
  double runtime_ms = 0.0;
  std::string error;  // non-empty when the cell failed
};

/// Runs the full grid. Datasets are generated per (cell, repetition) with
/// seeds mixed from the master seed only, so every algorithm sees the same
/// data; algorithm noise streams additionally mix in the algorithm/rho
/// identity. Cells run in a `jobs`-wide pool; output order is normalized, so
/// results are byte-stable regardless of scheduling. Per-cell failures become
/// error rows and the sweep continues.
std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg);

/// CSV with header alg,env,H,K,rho,seed,subopt,runtime_ms; floats printed
/// with 6 significant digits, infinite rho as `inf`.
std::string to_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_csv(const std::string& text);

/// Line plot of mean suboptimality vs K, one polyline per (alg, rho) series.
std::string render_svg(const std::vector<ResultRow>& rows);

/// Writes the CSV and, when svg_path is non-empty, the SVG plot.
void emit_outputs(const std::vector<ResultRow>& rows, const std::string& csv_path,
                  const std::string& svg_path);

}  // namespace dporl
