#include "dporl/mdp_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace dporl {

namespace {

constexpr double kTol = 1e-12;

void check(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

// ---------------------------------------------------------------- Policy

Policy Policy::deterministic(int H, int S, int A, std::vector<int> actions) {
  check(H >= 1 && S >= 1 && A >= 1, "policy: dimensions must be positive");
  check(actions.size() == static_cast<std::size_t>(H) * S,
        "policy: action table size mismatch");
  for (int v : actions) check(v >= 0 && v < A, "policy: action index out of range");
  Policy p;
  p.S_ = S;
  p.A_ = A;
  p.H_ = H;
  p.deterministic_ = true;
  p.actions_ = std::move(actions);
  return p;
}

Policy Policy::stochastic(int H, int S, int A, std::vector<double> probs) {
  check(H >= 1 && S >= 1 && A >= 1, "policy: dimensions must be positive");
  check(probs.size() == static_cast<std::size_t>(H) * S * A,
        "policy: probability table size mismatch");
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s) {
      double sum = 0.0;
      for (int a = 0; a < A; ++a) {
        double p = probs[(static_cast<std::size_t>(h) * S + s) * A + a];
        check(p >= 0.0, "policy: negative probability");
        sum += p;
      }
      check(std::abs(sum - 1.0) <= 1e-9, "policy: row does not sum to 1");
    }
  Policy p;
  p.S_ = S;
  p.A_ = A;
  p.H_ = H;
  p.deterministic_ = false;
  p.probs_ = std::move(probs);
  return p;
}

Policy Policy::uniform(int H, int S, int A) {
  return stochastic(H, S, A,
                    std::vector<double>(static_cast<std::size_t>(H) * S * A,
                                        1.0 / A));
}

double Policy::prob(int h, int s, int a) const {
  if (deterministic_) return actions_[static_cast<std::size_t>(h) * S_ + s] == a ? 1.0 : 0.0;
  return probs_[(static_cast<std::size_t>(h) * S_ + s) * A_ + a];
}

int Policy::action(int h, int s) const {
  check(deterministic_, "policy: action() requires a deterministic policy");
  return actions_[static_cast<std::size_t>(h) * S_ + s];
}

int Policy::sample_action(int h, int s, Rng& rng) const {
  if (deterministic_) return actions_[static_cast<std::size_t>(h) * S_ + s];
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng);
  double acc = 0.0;
  for (int a = 0; a < A_; ++a) {
    acc += probs_[(static_cast<std::size_t>(h) * S_ + s) * A_ + a];
    if (u < acc) return a;
  }
  return A_ - 1;  // guard against accumulated rounding
}

// --------------------------------------------------------------- reports

std::string Violation::str() const {
  std::ostringstream os;
  os << constraint << " at (h=" << h << ", s=" << s << ", a=" << a;
  if (s_next >= 0) os << ", s'=" << s_next;
  os << "), magnitude " << magnitude;
  return os.str();
}

double ValidationReport::worst() const {
  double w = 0.0;
  for (const auto& v : violations) w = std::max(w, std::abs(v.magnitude));
  return w;
}

std::string ValidationReport::str() const {
  if (violations.empty()) return "ok";
  std::ostringstream os;
  for (const auto& v : violations) os << v.str() << '\n';
  return os.str();
}

// ------------------------------------------------------------ TabularMDP

void TabularMDP::validate() const {
  check(S >= 1 && A >= 1 && H >= 1, "mdp: dimensions must be positive");
  check(P.size() == static_cast<std::size_t>(H) * S * A * S, "mdp: P size mismatch");
  check(r.size() == static_cast<std::size_t>(H) * S * A, "mdp: r size mismatch");
  check(d1.size() == static_cast<std::size_t>(S), "mdp: d1 size mismatch");
  double dsum = std::accumulate(d1.begin(), d1.end(), 0.0);
  check(std::abs(dsum - 1.0) <= 1e-9, "mdp: d1 does not sum to 1");
  for (double p : d1) check(p >= 0.0, "mdp: negative initial probability");
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        double sum = 0.0;
        for (int s2 = 0; s2 < S; ++s2) {
          double p = P[pidx(h, s, a, s2)];
          check(p >= -kTol, "mdp: negative transition probability");
          sum += p;
        }
        check(std::abs(sum - 1.0) <= 1e-9, "mdp: transition row does not sum to 1");
        double rv = r[ridx(h, s, a)];
        check(rv >= -kTol && rv <= 1.0 + kTol, "mdp: reward outside [0,1]");
      }
}

// ------------------------------------------------------------- LinearMDP

double LinearMDP::transition(int h, int s, int a, int s2) const {
  auto f = phi_at(s, a);
  auto n = nu_at(h, s2);
  double acc = 0.0;
  for (int i = 0; i < d; ++i) acc += f[i] * n[i];
  return acc;
}

double LinearMDP::reward(int h, int s, int a) const {
  auto f = phi_at(s, a);
  auto t = theta_at(h);
  double acc = 0.0;
  for (int i = 0; i < d; ++i) acc += f[i] * t[i];
  return acc;
}

ValidationReport validate_linear_mdp(const LinearMDP& lin) {
  check(lin.S >= 1 && lin.A >= 1 && lin.H >= 1 && lin.d >= 1,
        "linear mdp: dimensions must be positive");
  check(lin.phi.size() == static_cast<std::size_t>(lin.S) * lin.A * lin.d,
        "linear mdp: phi size mismatch");
  check(lin.nu.size() == static_cast<std::size_t>(lin.H) * lin.S * lin.d,
        "linear mdp: nu size mismatch");
  check(lin.theta.size() == static_cast<std::size_t>(lin.H) * lin.d,
        "linear mdp: theta size mismatch");
  check(lin.d1.size() == static_cast<std::size_t>(lin.S),
        "linear mdp: d1 size mismatch");

  ValidationReport rep;
  for (int h = 0; h < lin.H; ++h)
    for (int s = 0; s < lin.S; ++s)
      for (int a = 0; a < lin.A; ++a) {
        double sum = 0.0;
        for (int s2 = 0; s2 < lin.S; ++s2) {
          double p = lin.transition(h, s, a, s2);
          sum += p;
          if (p < -kTol)
            rep.violations.push_back(
                {"negative transition probability", h, s, a, s2, p});
        }
        if (std::abs(sum - 1.0) > kTol)
          rep.violations.push_back(
              {"transition row sum != 1", h, s, a, -1, sum - 1.0});
        double rv = lin.reward(h, s, a);
        if (rv < -kTol)
          rep.violations.push_back({"reward below 0", h, s, a, -1, rv});
        if (rv > 1.0 + kTol)
          rep.violations.push_back({"reward above 1", h, s, a, -1, rv - 1.0});
      }
  return rep;
}

TabularMDP tabularize(const LinearMDP& lin) {
  ValidationReport rep = validate_linear_mdp(lin);
  if (!rep.empty())
    throw std::invalid_argument("tabularize: linear MDP invalid:\n" + rep.str());

  TabularMDP mdp;
  mdp.S = lin.S;
  mdp.A = lin.A;
  mdp.H = lin.H;
  mdp.P.resize(static_cast<std::size_t>(lin.H) * lin.S * lin.A * lin.S);
  mdp.r.resize(static_cast<std::size_t>(lin.H) * lin.S * lin.A);
  mdp.d1 = lin.d1;
  for (int h = 0; h < lin.H; ++h)
    for (int s = 0; s < lin.S; ++s)
      for (int a = 0; a < lin.A; ++a) {
        double sum = 0.0;
        for (int s2 = 0; s2 < lin.S; ++s2) {
          double p = std::max(0.0, lin.transition(h, s, a, s2));
          mdp.P[mdp.pidx(h, s, a, s2)] = p;
          sum += p;
        }
        for (int s2 = 0; s2 < lin.S; ++s2) mdp.P[mdp.pidx(h, s, a, s2)] /= sum;
        mdp.r[mdp.ridx(h, s, a)] = std::clamp(lin.reward(h, s, a), 0.0, 1.0);
      }
  return mdp;
}

// ------------------------------------------------------------ evaluation

PolicyEvaluation exact_policy_value(const TabularMDP& mdp, const Policy& pi) {
  check(pi.S() == mdp.S && pi.A() == mdp.A && pi.H() == mdp.H,
        "exact_policy_value: policy dimensions do not match mdp");
  const int S = mdp.S, A = mdp.A, H = mdp.H;
  PolicyEvaluation ev;
  ev.V.assign(static_cast<std::size_t>(H) * S, 0.0);
  ev.Q.assign(static_cast<std::size_t>(H) * S * A, 0.0);
  std::vector<double> vnext(S, 0.0);
  for (int h = H - 1; h >= 0; --h) {
    for (int s = 0; s < S; ++s) {
      double vs = 0.0;
      for (int a = 0; a < A; ++a) {
        double q = mdp.r[mdp.ridx(h, s, a)];
        auto row = mdp.row(h, s, a);
        for (int s2 = 0; s2 < S; ++s2) q += row[s2] * vnext[s2];
        ev.Q[(static_cast<std::size_t>(h) * S + s) * A + a] = q;
        vs += pi.prob(h, s, a) * q;
      }
      ev.V[static_cast<std::size_t>(h) * S + s] = vs;
    }
    for (int s = 0; s < S; ++s) vnext[s] = ev.V[static_cast<std::size_t>(h) * S + s];
  }
  ev.v = 0.0;
  for (int s = 0; s < S; ++s) ev.v += mdp.d1[s] * vnext[s];
  return ev;
}

OptimalSolution solve_optimal(const TabularMDP& mdp) {
  const int S = mdp.S, A = mdp.A, H = mdp.H;
  OptimalSolution sol;
  sol.V_star.assign(static_cast<std::size_t>(H) * S, 0.0);
  std::vector<int> actions(static_cast<std::size_t>(H) * S, 0);
  std::vector<double> vnext(S, 0.0);
  for (int h = H - 1; h >= 0; --h) {
    for (int s = 0; s < S; ++s) {
      double best = -1.0;
      int best_a = 0;
      for (int a = 0; a < A; ++a) {
        double q = mdp.r[mdp.ridx(h, s, a)];
        auto row = mdp.row(h, s, a);
        for (int s2 = 0; s2 < S; ++s2) q += row[s2] * vnext[s2];
        if (q > best) {  // strict: ties stay at the lowest index
          best = q;
          best_a = a;
        }
      }
      sol.V_star[static_cast<std::size_t>(h) * S + s] = best;
      actions[static_cast<std::size_t>(h) * S + s] = best_a;
    }
    for (int s = 0; s < S; ++s) vnext[s] = sol.V_star[static_cast<std::size_t>(h) * S + s];
  }
  sol.v_star = 0.0;
  for (int s = 0; s < S; ++s) sol.v_star += mdp.d1[s] * vnext[s];
  sol.pi_star = Policy::deterministic(H, S, A, std::move(actions));
  return sol;
}

OccupancyTable occupancy(const TabularMDP& mdp, const Policy& pi) {
  check(pi.S() == mdp.S && pi.A() == mdp.A && pi.H() == mdp.H,
        "occupancy: policy dimensions do not match mdp");
  const int S = mdp.S, A = mdp.A, H = mdp.H;
  OccupancyTable occ;
  occ.S = S;
  occ.A = A;
  occ.H = H;
  occ.d.assign(static_cast<std::size_t>(H) * S * A, 0.0);
  std::vector<double> state(mdp.d1);
  for (int h = 0; h < H; ++h) {
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a)
        occ.d[(static_cast<std::size_t>(h) * S + s) * A + a] =
            state[s] * pi.prob(h, s, a);
    if (h + 1 < H) {
      std::vector<double> next(S, 0.0);
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
          double w = occ.d[(static_cast<std::size_t>(h) * S + s) * A + a];
          if (w == 0.0) continue;
          auto row = mdp.row(h, s, a);
          for (int s2 = 0; s2 < S; ++s2) next[s2] += w * row[s2];
        }
      state = std::move(next);
    }
  }
  return occ;
}

double OccupancyTable::min_positive() const {
  double m = 0.0;
  for (double x : d)
    if (x > 0.0 && (m == 0.0 || x < m)) m = x;
  return m;
}

std::vector<std::pair<int, int>> OccupancyTable::trackable(int h) const {
  std::vector<std::pair<int, int>> out;
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a)
      if (d[(static_cast<std::size_t>(h) * S + s) * A + a] > 0.0)
        out.emplace_back(s, a);
  return out;
}

// -------------------------------------------------------------- sampling

namespace {

int sample_index(std::span<const double> probs, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng);
  double acc = 0.0;
  int last = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] == 0.0) continue;
    acc += probs[i];
    last = static_cast<int>(i);
    if (u < acc) return last;
  }
  return last;
}

}  // namespace

Dataset sample_dataset(const TabularMDP& mdp, const Policy& mu,
                       std::int64_t count, std::uint64_t seed) {
  check(count >= 1, "sample_dataset: count must be >= 1");
  check(mu.S() == mdp.S && mu.A() == mdp.A && mu.H() == mdp.H,
        "sample_dataset: policy dimensions do not match mdp");
  const int H = mdp.H;
  Dataset data;
  data.H = H;
  data.count = count;
  data.s.resize(static_cast<std::size_t>(count) * H);
  data.a.resize(static_cast<std::size_t>(count) * H);
  data.s_next.resize(static_cast<std::size_t>(count) * H);
  data.r.resize(static_cast<std::size_t>(count) * H);
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::int64_t t = 0; t < count; ++t) {
    int s = sample_index(mdp.d1, rng);
    for (int h = 0; h < H; ++h) {
      int a = mu.sample_action(h, s, rng);
      double mean = mdp.r[mdp.ridx(h, s, a)];
      double rv = unif(rng) < mean ? 1.0 : 0.0;
      int s2 = sample_index(mdp.row(h, s, a), rng);
      std::size_t i = data.idx(t, h);
      data.s[i] = s;
      data.a[i] = a;
      data.r[i] = rv;
      data.s_next[i] = s2;
      s = s2;
    }
  }
  return data;
}

std::pair<double, double> monte_carlo_value(const TabularMDP& mdp,
                                            const Policy& pi,
                                            std::int64_t rollouts,
                                            std::uint64_t seed) {
  check(rollouts >= 1, "monte_carlo_value: rollouts must be >= 1");
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double sum = 0.0, sumsq = 0.0;
  for (std::int64_t t = 0; t < rollouts; ++t) {
    int s = sample_index(mdp.d1, rng);
    double ret = 0.0;
    for (int h = 0; h < mdp.H; ++h) {
      int a = pi.sample_action(h, s, rng);
      if (unif(rng) < mdp.r[mdp.ridx(h, s, a)]) ret += 1.0;
      s = sample_index(mdp.row(h, s, a), rng);
    }
    sum += ret;
    sumsq += ret * ret;
  }
  double n = static_cast<double>(rollouts);
  double mean = sum / n;
  double var = rollouts > 1 ? std::max(0.0, (sumsq - n * mean * mean) / (n - 1.0)) : 0.0;
  return {mean, std::sqrt(var / n)};
}

}  // namespace dporl
