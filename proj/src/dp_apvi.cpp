#include "dporl/dp_apvi.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dporl {

double bernstein_bonus(std::span<const double> p_row,
                       std::span<const double> v_next, double n_tilde_sa,
                       double e_bound, double iota, int H,
                       const ApviConfig& cfg) {
  if (!(n_tilde_sa > e_bound)) return cfg.resolve_c(H) * H;
  const std::size_t S = p_row.size();
  double mean = 0.0, second = 0.0;
  for (std::size_t s2 = 0; s2 < S; ++s2) {
    mean += p_row[s2] * v_next[s2];
    second += p_row[s2] * v_next[s2] * v_next[s2];
  }
  double var = std::max(0.0, second - mean * mean);
  double main_term = cfg.c1 * std::sqrt(var * iota / (n_tilde_sa - e_bound));
  double privacy_term =
      cfg.c2 * static_cast<double>(S) * H * e_bound * iota / n_tilde_sa;
  return main_term + privacy_term;
}

LearnedPolicy dp_apvi(const Dataset& data, int S, int A, int H,
                      std::span<const double> reward, const ApviConfig& cfg,
                      std::uint64_t seed) {
  if (reward.size() != static_cast<std::size_t>(H) * S * A)
    throw std::invalid_argument("dp_apvi: reward table size mismatch");
  for (double rv : reward)
    if (rv < 0.0 || rv > 1.0)
      throw std::invalid_argument("dp_apvi: rewards must lie in [0,1]");

  ReleaseParams params(cfg.budget, cfg.delta, S, A, H);
  privacy::Accountant acct;
  Rng rng = make_rng(seed);

  CountTables raw = raw_counts(data, S, A, H);
  CountTables noisy = noisy_counts(raw, params, rng, &acct);
  const double e_bound = params.e_bound();
  CountTables counts = consistent_counts(noisy, e_bound);
  std::vector<double> kernel = private_kernel(counts, e_bound);

  double configured = cfg.budget.kind == privacy::BudgetKind::zcdp
                          ? cfg.budget.rho
                          : cfg.budget.epsilon;
  acct.expect_total(configured);

  const double iota =
      std::log(static_cast<double>(H) * S * A / cfg.delta);

  LearnedPolicy out;
  out.q_bar.assign(static_cast<std::size_t>(H) * S * A, 0.0);
  out.v_tilde.assign(static_cast<std::size_t>(H) * S, 0.0);
  out.bonus.assign(static_cast<std::size_t>(H) * S * A, 0.0);
  std::vector<int> actions(static_cast<std::size_t>(H) * S, 0);

  std::vector<double> vnext(S, 0.0);
  for (int h = H - 1; h >= 0; --h) {
    const double vmax = static_cast<double>(H - h);  // H - h + 1 with 0-based h
    for (int s = 0; s < S; ++s) {
      double best = -1.0;
      int best_a = 0;
      for (int a = 0; a < A; ++a) {
        std::size_t qi = (static_cast<std::size_t>(h) * S + s) * A + a;
        std::span<const double> p_row{
            kernel.data() + counts.sas_idx(h, s, a, 0),
            static_cast<std::size_t>(S)};
        double q_tilde = reward[qi];
        for (int s2 = 0; s2 < S; ++s2) q_tilde += p_row[s2] * vnext[s2];
        double gamma = bernstein_bonus(p_row, vnext,
                                       counts.sa[counts.sa_idx(h, s, a)],
                                       e_bound, iota, H, cfg);
        double q_bar = std::clamp(q_tilde - gamma, 0.0, vmax);
        out.bonus[qi] = gamma;
        out.q_bar[qi] = q_bar;
        if (q_bar > best) {
          best = q_bar;
          best_a = a;
        }
      }
      out.v_tilde[static_cast<std::size_t>(h) * S + s] = best;
      actions[static_cast<std::size_t>(h) * S + s] = best_a;
    }
    for (int s = 0; s < S; ++s) vnext[s] = out.v_tilde[static_cast<std::size_t>(h) * S + s];
  }

  out.policy = Policy::deterministic(H, S, A, std::move(actions));
  out.ledger_text = acct.to_text();
  out.diagnostics["e_bound"] = e_bound;
  out.diagnostics["iota"] = iota;
  out.diagnostics["c_unvisited"] = cfg.resolve_c(H);
  out.diagnostics["budget_total"] = acct.total();
  return out;
}

LearnedPolicy apvi(const Dataset& data, int S, int A, int H,
                   std::span<const double> reward, ApviConfig cfg) {
  cfg.budget = privacy::PrivacyBudget::zcdp(0.0);
  return dp_apvi(data, S, A, H, reward, cfg, 0);
}

}  // namespace dporl
