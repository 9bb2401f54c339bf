#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "dporl/count_release.hpp"
#include "dporl/types.hpp"

namespace dporl {

/// Configuration of the tabular pessimistic learner. The bonus constants
/// default to c1 = sqrt(2), c2 = 16; the unvisited-pair penalty multiplier
/// defaults to H+1 so that pairs below the count threshold are fully
/// suppressed (their clipped Q hits 0).
struct ApviConfig {
  double c1 = 1.4142135623730951;  // sqrt(2)
  double c2 = 16.0;
  std::optional<double> c_unvisited;  // defaults to H+1 when unset
  double delta = 0.1;
  privacy::PrivacyBudget budget = privacy::PrivacyBudget::zcdp(0.0);

  double resolve_c(int H) const {
    return c_unvisited ? *c_unvisited : static_cast<double>(H) + 1.0;
  }
};

/// Bernstein-type private pessimism for one (s,a):
///   c1 sqrt(Var_{P}(V) iota / (n - E)) + c2 S H E iota / n   when n > E,
///   C H                                                      otherwise.
/// Var is the population variance of V under the private kernel row.
double bernstein_bonus(std::span<const double> p_row,
                       std::span<const double> v_next, double n_tilde_sa,
                       double e_bound, double iota, int H,
                       const ApviConfig& cfg);

/// Differentially private adaptive pessimistic value iteration. Releases the
/// two count families, projects them to consistency, forms the private kernel
/// and runs the pessimistic backward induction. reward is the known mean
/// reward table [h][s][a]. With budget 0 this is exactly the non-private
/// baseline.
LearnedPolicy dp_apvi(const Dataset& data, int S, int A, int H,
                      std::span<const double> reward, const ApviConfig& cfg,
                      std::uint64_t seed);

/// Non-private baseline: dp_apvi with a zero budget (no noise path at all).
LearnedPolicy apvi(const Dataset& data, int S, int A, int H,
                   std::span<const double> reward, ApviConfig cfg = {});

}  // namespace dporl
