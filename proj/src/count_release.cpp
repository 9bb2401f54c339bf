#include "dporl/count_release.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace dporl {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

ReleaseParams::ReleaseParams(privacy::PrivacyBudget b, double delta_, int S_,
                             int A_, int H_)
    : budget(b), delta(delta_), S(S_), A(A_), H(H_) {
  require(S >= 1 && A >= 1 && H >= 1, "release params: bad dimensions");
  require(delta > 0.0 && delta < 1.0, "release params: delta must be in (0,1)");
  require(budget.kind != privacy::BudgetKind::approx_dp,
          "release params: counts are released under zCDP or pure DP");
}

double ReleaseParams::sigma2() const {
  if (budget.kind != privacy::BudgetKind::zcdp || budget.rho == 0.0) return 0.0;
  return 2.0 * H / budget.rho;
}

double ReleaseParams::laplace_scale() const {
  if (budget.kind != privacy::BudgetKind::pure_dp || budget.epsilon == 0.0)
    return 0.0;
  return 4.0 * H / budget.epsilon;
}

double ReleaseParams::e_bound() const {
  if (budget.noiseless()) return 0.0;
  double log_term =
      std::log(4.0 * H * static_cast<double>(S) * S * A / delta);
  if (budget.kind == privacy::BudgetKind::zcdp)
    return 4.0 * std::sqrt(H * log_term / budget.rho);
  return laplace_scale() * log_term;
}

CountTables raw_counts(const Dataset& data, int S, int A, int H) {
  require(S >= 1 && A >= 1 && H >= 1, "raw_counts: bad dimensions");
  require(data.H == H, "raw_counts: dataset horizon mismatch");
  CountTables t;
  t.S = S;
  t.A = A;
  t.H = H;
  t.sa.assign(static_cast<std::size_t>(H) * S * A, 0.0);
  t.sas.assign(static_cast<std::size_t>(H) * S * A * S, 0.0);
  for (std::int64_t traj = 0; traj < data.count; ++traj)
    for (int h = 0; h < H; ++h) {
      std::size_t i = data.idx(traj, h);
      int s = data.s[i], a = data.a[i], s2 = data.s_next[i];
      require(s >= 0 && s < S && a >= 0 && a < A && s2 >= 0 && s2 < S,
              "raw_counts: transition index out of range");
      t.sa[t.sa_idx(h, s, a)] += 1.0;
      t.sas[t.sas_idx(h, s, a, s2)] += 1.0;
    }
  return t;
}

CountTables noisy_counts(const CountTables& raw, const ReleaseParams& params,
                         Rng& rng, privacy::Accountant* acct) {
  CountTables out = raw;
  const auto& budget = params.budget;
  if (budget.noiseless()) {
    if (acct && budget.kind == privacy::BudgetKind::zcdp) {
      acct->charge("counts_sa", std::sqrt(2.0 * params.H), 0.0, 0.0);
      acct->charge("counts_sas", std::sqrt(2.0 * params.H), 0.0, 0.0);
    }
    return out;
  }

  if (budget.kind == privacy::BudgetKind::zcdp) {
    // One trajectory touches H cells of each family, so the l2 sensitivity of
    // each family is sqrt(2H); each family gets rho/2, giving sigma^2 = 2H/rho.
    double half = budget.rho / 2.0;
    double delta2 = std::sqrt(2.0 * params.H);
    auto [sa, sigma_sa] = privacy::gaussian_mechanism(out.sa, delta2, half, rng);
    auto [sas, sigma_sas] =
        privacy::gaussian_mechanism(out.sas, delta2, half, rng);
    out.sa = std::move(sa);
    out.sas = std::move(sas);
    if (acct) {
      acct->charge("counts_sa", delta2, half, sigma_sa);
      acct->charge("counts_sas", delta2, half, sigma_sas);
    }
  } else {
    // Joint l1 sensitivity of both families is 4H -> Lap(4H/eps) per entry.
    double scale = params.laplace_scale();
    out.sa = privacy::laplace_mechanism(out.sa, 4.0 * params.H, budget.epsilon, rng);
    out.sas =
        privacy::laplace_mechanism(out.sas, 4.0 * params.H, budget.epsilon, rng);
    if (acct) acct->charge("counts_joint", 4.0 * params.H, budget.epsilon, scale);
  }
  for (double& v : out.sa) v = std::max(0.0, v);
  for (double& v : out.sas) v = std::max(0.0, v);
  return out;
}

namespace {

// Smallest achievable sum when each child may move at most t from its noisy
// value while staying nonnegative.
double min_sum_at(std::span<const double> n, double t) {
  double s = 0.0;
  for (double v : n) s += std::max(0.0, v - t);
  return s;
}

double max_sum_at(std::span<const double> n, double t) {
  double s = 0.0;
  for (double v : n) s += v + t;
  return s;
}

bool feasible(std::span<const double> n, double target, double half_band,
              double t) {
  return min_sum_at(n, t) <= target + half_band &&
         max_sum_at(n, t) >= target - half_band;
}

// Water level c >= 0 with sum_i max(0, n_i - c) == goal, for goal <= sum(n).
// Solved exactly on the sorted values.
double water_level(std::span<const double> n, double goal) {
  std::vector<double> sorted(n.begin(), n.end());
  std::sort(sorted.begin(), sorted.end());
  double total = std::accumulate(sorted.begin(), sorted.end(), 0.0);
  std::size_t k = sorted.size();  // coordinates still above the level
  double pinned = 0.0;            // mass removed by pinning at zero
  double prev = 0.0;
  for (std::size_t i = 0; i <= sorted.size(); ++i) {
    if (k == 0) break;  // goal is 0 within rounding: pin everything
    // With level c in [prev, next], sum = total - pinned - k*c.
    double c = (total - pinned - goal) / static_cast<double>(k);
    double next = i < sorted.size() ? sorted[i]
                                    : std::numeric_limits<double>::infinity();
    if (c >= prev && c <= next) return std::max(0.0, c);
    if (i < sorted.size()) {
      pinned += sorted[i];
      --k;
      prev = sorted[i];
    }
  }
  return std::max(0.0, sorted.empty() ? 0.0 : sorted.back());
}

}  // namespace

ProjectedRow project_row(std::span<const double> noisy_children,
                         double parent_target, double half_band) {
  require(!noisy_children.empty(), "project_row: empty row");
  require(half_band >= 0.0, "project_row: negative band");
  require(parent_target + half_band >= 0.0,
          "project_row: required sum is negative");
  for (double v : noisy_children)
    require(v >= 0.0, "project_row: children must be nonnegative");
  const std::size_t S = noisy_children.size();
  const double child_sum =
      std::accumulate(noisy_children.begin(), noisy_children.end(), 0.0);

  // Bisection for the optimal objective t; the upper bracket is always
  // feasible since every coordinate can reach any nonnegative value.
  double lo = 0.0;
  double hi = 1.0;
  double span_need =
      std::abs(parent_target - child_sum) + half_band +
      *std::max_element(noisy_children.begin(), noisy_children.end());
  hi = std::max(hi, span_need + 1.0);
  if (!feasible(noisy_children, parent_target, half_band, lo)) {
    for (int it = 0; it < 60; ++it) {
      double mid = 0.5 * (lo + hi);
      if (feasible(noisy_children, parent_target, half_band, mid))
        hi = mid;
      else
        lo = mid;
      if (hi - lo <= 1e-12) break;
    }
  } else {
    hi = 0.0;
  }
  const double t_star = hi;

  // Admissible sum closest to the current child sum.
  double target = std::clamp(child_sum, parent_target - half_band,
                             parent_target + half_band);
  target = std::clamp(target, min_sum_at(noisy_children, t_star),
                      max_sum_at(noisy_children, t_star));

  ProjectedRow out;
  out.x.assign(noisy_children.begin(), noisy_children.end());
  double residual = target - child_sum;
  if (residual >= 0.0) {
    double step = residual / static_cast<double>(S);
    for (double& v : out.x) v += step;
  } else {
    double level = water_level(noisy_children, target);
    for (double& v : out.x) v = std::max(0.0, v - level);
  }
  out.parent = std::accumulate(out.x.begin(), out.x.end(), 0.0);
  out.objective = 0.0;
  for (std::size_t i = 0; i < S; ++i)
    out.objective = std::max(out.objective, std::abs(out.x[i] - noisy_children[i]));
  return out;
}

CountTables consistent_counts(const CountTables& noisy, double e_bound) {
  require(e_bound >= 0.0, "consistent_counts: negative bound");
  CountTables out = noisy;
  const double half_band = e_bound / 2.0;
  for (int h = 0; h < noisy.H; ++h)
    for (int s = 0; s < noisy.S; ++s)
      for (int a = 0; a < noisy.A; ++a) {
        ProjectedRow row = project_row(noisy.sas_row(h, s, a),
                                       noisy.sa[noisy.sa_idx(h, s, a)], half_band);
        std::copy(row.x.begin(), row.x.end(),
                  out.sas.begin() + out.sas_idx(h, s, a, 0));
        out.sa[out.sa_idx(h, s, a)] = row.parent;
      }
  return out;
}

std::vector<double> private_kernel(const CountTables& consistent,
                                   double e_bound) {
  require(e_bound >= 0.0, "private_kernel: negative bound");
  const int S = consistent.S, A = consistent.A, H = consistent.H;
  std::vector<double> kernel(static_cast<std::size_t>(H) * S * A * S);
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        double parent = consistent.sa[consistent.sa_idx(h, s, a)];
        auto row = consistent.sas_row(h, s, a);
        double* out = kernel.data() + consistent.sas_idx(h, s, a, 0);
        if (parent > e_bound) {
          for (int s2 = 0; s2 < S; ++s2) out[s2] = row[s2] / parent;
        } else {
          for (int s2 = 0; s2 < S; ++s2) out[s2] = 1.0 / S;
        }
      }
  return kernel;
}

}  // namespace dporl
