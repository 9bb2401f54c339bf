// Acceptance suite: one pass/fail line per criterion. Exit code is the
// number of failed criteria.
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "dporl/dp_apvi.hpp"
#include "dporl/dp_vapvi.hpp"
#include "dporl/harness.hpp"
#include "dporl/mdp_core.hpp"
#include "dporl/privacy.hpp"
#include "oracles.hpp"

using namespace dporl;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Check {
  Outcome out;
  void expect(bool ok, const std::string& what) {
    if (!ok) {
      out.pass = false;
      if (!out.detail.empty()) out.detail += "; ";
      out.detail += what;
    }
  }
  void note(const std::string& what) {
    if (!out.detail.empty()) out.detail += "; ";
    out.detail += what;
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Noiseless reduction: the private learners with budget 0 are bit-equal to
//    their baselines.
Outcome criterion_noiseless_reduction() {
  Check c;
  int equal_apvi = 0, equal_vapvi = 0;
  for (int trial = 0; trial < 50; ++trial) {
    TabularMDP mdp = random_tabular_mdp(3, 2, 4, 10'000 + trial);
    Dataset data = sample_dataset(mdp, Policy::uniform(4, 3, 2), 120, trial);
    ApviConfig cfg;
    cfg.budget = privacy::PrivacyBudget::zcdp(0.0);
    LearnedPolicy a = dp_apvi(data, 3, 2, 4, mdp.r, cfg, 555 + trial);
    LearnedPolicy b = apvi(data, 3, 2, 4, mdp.r);
    if (a.policy == b.policy && a.q_bar == b.q_bar && a.v_tilde == b.v_tilde)
      ++equal_apvi;
  }
  LinearMDP env = build_appendix_f_mdp(3, 77);
  TabularMDP tab = tabularize(env);
  Policy mu = behavior_policy_appendix_f(0.6, env.H, env.S, env.A);
  for (int trial = 0; trial < 50; ++trial) {
    Dataset data = sample_dataset(tab, mu, 50, 900 + trial);
    VapviConfig cfg;
    cfg.rho = 0.0;
    LearnedPolicy a = dp_vapvi(data, data, env, cfg, 42 + trial);
    LearnedPolicy b = vapvi(data, data, env);
    if (a.policy == b.policy && a.q_bar == b.q_bar && a.v_tilde == b.v_tilde)
      ++equal_vapvi;
  }
  c.expect(equal_apvi == 50, "apvi reduction equal on " +
                                 std::to_string(equal_apvi) + "/50 datasets");
  c.expect(equal_vapvi == 50, "vapvi reduction equal on " +
                                  std::to_string(equal_vapvi) + "/50 datasets");
  if (c.out.pass) c.note("identical tables on 50+50 datasets");
  return c.out;
}

// ---------------------------------------------------------------------------
// 2. LP projection optimality vs the closed-form oracle + worked examples.
Outcome criterion_lp_projection() {
  Check c;
  Rng rng = make_rng(424242);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 6);
  double worst_gap = 0.0, worst_violation = 0.0;
  for (int it = 0; it < 200; ++it) {
    int S = dim(rng);
    std::vector<double> row(S);
    for (double& v : row) v = 25.0 * unif(rng);
    double parent = 50.0 * unif(rng);
    double band = 6.0 * unif(rng);
    ProjectedRow sol = project_row(row, parent, band);
    double oracle = oracles::lp_min_objective(row, parent, band);
    worst_gap = std::max(worst_gap, std::abs(sol.objective - oracle));
    double sum = std::accumulate(sol.x.begin(), sol.x.end(), 0.0);
    worst_violation = std::max(worst_violation, std::abs(sum - parent) - band);
    for (double v : sol.x) worst_violation = std::max(worst_violation, -v);
    for (int i = 0; i < S; ++i)
      worst_violation = std::max(
          worst_violation, std::abs(sol.x[i] - row[i]) - sol.objective);
  }
  c.expect(worst_gap <= 1e-9, "objective gap " + fmt(worst_gap));
  c.expect(worst_violation <= 1e-9, "constraint violation " + fmt(worst_violation));

  std::vector<double> r1{5.0, 3.0};
  ProjectedRow p1 = project_row(r1, 10.0, 1.0);
  c.expect(std::abs(p1.x[0] - 5.5) <= 1e-12 && std::abs(p1.x[1] - 3.5) <= 1e-12 &&
               std::abs(p1.objective - 0.5) <= 1e-12,
           "worked example 1 mismatch");
  std::vector<double> r2{4.0, 6.0};
  ProjectedRow p2 = project_row(r2, 10.0, 1.0);
  c.expect(p2.x == r2 && p2.objective == 0.0, "worked example 2 mismatch");
  std::vector<double> r3{0.2, 0.1};
  ProjectedRow p3 = project_row(r3, 5.0, 0.5);
  c.expect(std::abs(p3.x[0] - 2.3) <= 1e-12 && std::abs(p3.x[1] - 2.2) <= 1e-12 &&
               std::abs(p3.objective - 2.1) <= 1e-12,
           "worked example 3 mismatch");
  if (c.out.pass)
    c.note("200 instances, max objective gap " + fmt(worst_gap) +
           ", max constraint violation " + fmt(std::max(0.0, worst_violation)));
  return c.out;
}

// ---------------------------------------------------------------------------
// 3. Projection error bound under bounded noise.
Outcome criterion_projection_error_bound() {
  Check c;
  Rng rng = make_rng(31337);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::uniform_real_distribution<double> mag(0.0, 40.0);
  std::uniform_int_distribution<int> dim(1, 6);
  const double e_bound = 4.0;
  double worst = 0.0;
  for (int it = 0; it < 1000; ++it) {
    int S = dim(rng);
    std::vector<double> truth(S), noisy(S);
    for (double& v : truth) v = std::floor(mag(rng));
    double parent_truth = std::accumulate(truth.begin(), truth.end(), 0.0);
    for (int i = 0; i < S; ++i)
      noisy[i] = std::max(0.0, truth[i] + unif(rng) * e_bound / 2.0);
    double parent_noisy = std::max(0.0, parent_truth + unif(rng) * e_bound / 2.0);
    ProjectedRow sol = project_row(noisy, parent_noisy, e_bound / 2.0);
    for (int i = 0; i < S; ++i)
      worst = std::max(worst, std::abs(sol.x[i] - truth[i]));
    worst = std::max(worst, std::abs(sol.parent - parent_truth));
  }
  c.expect(worst <= e_bound, "max |projected - true| = " + fmt(worst) +
                                 " exceeds E = " + fmt(e_bound));
  if (c.out.pass)
    c.note("1000 trials, max |projected - true| = " + fmt(worst) +
           " <= E = " + fmt(e_bound));
  return c.out;
}

// ---------------------------------------------------------------------------
// 4. Privacy accounting and mechanism calibration.
Outcome criterion_privacy_accounting() {
  Check c;
  {
    TabularMDP mdp = random_tabular_mdp(3, 2, 4, 5);
    Dataset data = sample_dataset(mdp, Policy::uniform(4, 3, 2), 100, 6);
    ApviConfig cfg;
    cfg.budget = privacy::PrivacyBudget::zcdp(1.3);
    LearnedPolicy lp = dp_apvi(data, 3, 2, 4, mdp.r, cfg, 7);
    bool two_halves = lp.ledger_text.find("counts_sa") != std::string::npos &&
                      lp.ledger_text.find("0.65") != std::string::npos;
    c.expect(std::abs(lp.diagnostics.at("budget_total") - 1.3) <= 1e-12,
             "dp-apvi ledger total " + fmt(lp.diagnostics.at("budget_total")));
    c.expect(two_halves, "dp-apvi ledger is not two rho/2 releases");
  }
  {
    LinearMDP env = build_appendix_f_mdp(4, 3);
    TabularMDP tab = tabularize(env);
    Policy mu = behavior_policy_appendix_f(0.6, env.H, env.S, env.A);
    Dataset data = sample_dataset(tab, mu, 40, 2);
    VapviConfig cfg;
    cfg.rho = 2.5;
    LearnedPolicy lp = dp_vapvi(data, data, env, cfg, 11);
    c.expect(lp.diagnostics.at("releases") == 5.0 * env.H,
             "dp-vapvi release count " + fmt(lp.diagnostics.at("releases")));
    c.expect(std::abs(lp.diagnostics.at("budget_total") - 2.5) <= 1e-9 * 2.5,
             "dp-vapvi ledger total " + fmt(lp.diagnostics.at("budget_total")));
  }
  double eps = privacy::zcdp_to_approx_dp(1.0, std::exp(-1.0));
  c.expect(eps == 3.0, "conversion at (1, 1/e) gave " + fmt(eps));

  {
    const int n = 100000;
    std::vector<double> zeros(n, 0.0);
    auto [gauss, sigma] =
        privacy::gaussian_mechanism(zeros, std::sqrt(2.0), 1.0, 777ULL);
    (void)sigma;
    double var = 0.0, mean = 0.0;
    for (double v : gauss) mean += v;
    mean /= n;
    for (double v : gauss) var += (v - mean) * (v - mean);
    var /= n - 1;
    c.expect(std::abs(var - 1.0) <= 0.05,
             "gaussian empirical variance " + fmt(var));
    auto lap = privacy::laplace_mechanism(zeros, 3.0, 1.5, 778ULL);
    double mad = 0.0;
    for (double v : lap) mad += std::abs(v);
    mad /= n;
    c.expect(std::abs(mad - 2.0) <= 0.05 * 2.0,
             "laplace empirical mean |noise| " + fmt(mad));
  }
  if (c.out.pass)
    c.note("ledgers exact, conversion exact, moments within 5% at 1e5 draws");
  return c.out;
}

// ---------------------------------------------------------------------------
// 5. Exact evaluator vs Monte-Carlo on 10 random models.
Outcome criterion_evaluator_crosscheck() {
  Check c;
  double worst_sigmas = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    TabularMDP mdp =
        random_tabular_mdp(3 + trial % 3, 2 + trial % 2, 4, 77'000 + trial);
    Policy pi = Policy::uniform(mdp.H, mdp.S, mdp.A);
    double exact = exact_policy_value(mdp, pi).v;
    auto [est, se] = monte_carlo_value(mdp, pi, 100000, 4'000 + trial);
    double sigmas = se > 0 ? std::abs(est - exact) / se : 0.0;
    worst_sigmas = std::max(worst_sigmas, sigmas);
    c.expect(std::abs(est - exact) <= 3.0 * se,
             "model " + std::to_string(trial) + " off by " + fmt(sigmas) +
                 " standard errors");
  }
  if (c.out.pass)
    c.note("10 models, worst deviation " + fmt(worst_sigmas) +
           " standard errors at 1e5 rollouts");
  return c.out;
}

// ---------------------------------------------------------------------------
// 6. Simulation-study trend reproduction on the synthetic linear MDP.
Outcome criterion_linear_trends() {
  Check c;
  ExperimentConfig cfg;
  cfg.env = ExperimentConfig::Env::appendix_f;
  cfg.H = 20;
  cfg.env_seed = 1;
  cfg.algorithms = {"vapvi", "dp-vapvi", "pevi"};
  cfg.k_grid = {5, 10, 25, 50, 100, 250, 500, 1000};
  cfg.rho_grid = {1.0, 10.0};
  cfg.seeds = 5;
  cfg.master_seed = 1;
  cfg.jobs = 8;
  // Desk-scale reconstruction constants for the simulation study; the
  // module-level defaults keep every learner saturated at these sample sizes.
  cfg.vapvi.lambda = 50.0;
  cfg.vapvi.c_bonus = 0.012;
  cfg.vapvi.pessimism_mode = VapviConfig::PessimismMode::empirical;
  std::vector<ResultRow> rows = run_sweep(cfg);

  auto mean = [&](const std::string& alg, double rho, std::int64_t k) {
    double total = 0.0;
    int n = 0;
    for (const ResultRow& r : rows) {
      if (r.alg != alg || r.K != k) continue;
      bool match = std::isinf(rho) ? std::isinf(r.rho) : r.rho == rho;
      if (!match || !r.error.empty()) continue;
      total += r.subopt;
      ++n;
    }
    return n > 0 ? total / n : std::numeric_limits<double>::quiet_NaN();
  };
  const double inf = std::numeric_limits<double>::infinity();

  // a. learning: K = 1000 beats K = 5 for every algorithm.
  struct Series {
    const char* name;
    double rho;
  };
  for (Series s : {Series{"vapvi", inf}, Series{"dp-vapvi", 10.0},
                   Series{"dp-vapvi", 1.0}, Series{"pevi", inf}}) {
    double at5 = mean(s.name, s.rho, 5), at1000 = mean(s.name, s.rho, 1000);
    c.expect(at1000 < at5, std::string(s.name) + "(rho=" + fmt(s.rho) + ") " +
                               fmt(at1000) + " !< " + fmt(at5));
  }
  // b. ordering at K = 1000 with 10% relative tolerance.
  double v1000 = mean("vapvi", inf, 1000);
  double dp10 = mean("dp-vapvi", 10.0, 1000);
  double dp1 = mean("dp-vapvi", 1.0, 1000);
  c.expect(v1000 <= 1.1 * dp10,
           "vapvi " + fmt(v1000) + " > 1.1 * dp(10) " + fmt(dp10));
  c.expect(dp10 <= 1.1 * dp1, "dp(10) " + fmt(dp10) + " > 1.1 * dp(1) " + fmt(dp1));
  // c. private-to-nonprivate gap shrinks from K = 50 to K = 1000.
  double gap50 = std::abs(mean("dp-vapvi", 10.0, 50) - mean("vapvi", inf, 50));
  double gap1000 = std::abs(dp10 - v1000);
  c.expect(gap1000 < gap50, "gap at 1000 (" + fmt(gap1000) + ") !< gap at 50 (" +
                                fmt(gap50) + ")");
  // d. dp(10) at K = 1000 no worse than the non-variance-aware baseline.
  double pevi1000 = mean("pevi", inf, 1000);
  c.expect(dp10 <= pevi1000, "dp(10) " + fmt(dp10) + " > pevi " + fmt(pevi1000));
  if (c.out.pass)
    c.note("K=1000 means: vapvi " + fmt(v1000) + ", dp(10) " + fmt(dp10) +
           ", dp(1) " + fmt(dp1) + ", pevi " + fmt(pevi1000) +
           "; gap 50->1000: " + fmt(gap50) + "->" + fmt(gap1000));
  return c.out;
}

// ---------------------------------------------------------------------------
// 7. Tabular learner sanity at fixed budgets.
Outcome criterion_tabular_sanity() {
  Check c;
  TabularMDP mdp = random_tabular_mdp(3, 2, 5, 424242);
  Policy mu = eps_greedy_behavior(mdp, 0.3);
  OptimalSolution opt = solve_optimal(mdp);
  auto mean_subopt = [&](double rho, std::int64_t n) {
    double total = 0.0;
    for (int rep = 0; rep < 5; ++rep) {
      ApviConfig cfg;
      cfg.budget = privacy::PrivacyBudget::zcdp(rho);
      Dataset data = sample_dataset(
          mdp, mu, n,
          mix_seed({11ULL, static_cast<std::uint64_t>(n),
                    static_cast<std::uint64_t>(rep)}));
      LearnedPolicy lp = dp_apvi(data, 3, 2, 5, mdp.r, cfg,
                                 mix_seed({13ULL, static_cast<std::uint64_t>(rep)}));
      total += opt.v_star - exact_policy_value(mdp, lp.policy).v;
    }
    return total / 5.0;
  };
  double n0_small = mean_subopt(0.0, 100), n0_large = mean_subopt(0.0, 10000);
  c.expect(n0_large < n0_small,
           "rho=0: " + fmt(n0_large) + " !< " + fmt(n0_small));
  double n1_small = mean_subopt(1.0, 100), n1_large = mean_subopt(1.0, 10000);
  c.expect(n1_large < n1_small,
           "rho=1: " + fmt(n1_large) + " !< " + fmt(n1_small) +
               " (the privacy bonus term c2*S*H*E*iota/n exceeds the value "
               "range until n ~ 3.5e4, so both sizes return the same "
               "uniformly-pessimistic policy)");

  Dataset big = sample_dataset(mdp, mu, 100000, 9);
  LearnedPolicy lp = apvi(big, 3, 2, 5, mdp.r);
  double sub = opt.v_star - exact_policy_value(mdp, lp.policy).v;
  c.expect(sub <= 0.05 * 5, "noiseless subopt at n=1e5 is " + fmt(sub));
  c.note("rho=0: " + fmt(n0_small) + " -> " + fmt(n0_large) + "; rho=1: " +
         fmt(n1_small) + " -> " + fmt(n1_large) + "; noiseless n=1e5: " +
         fmt(sub));
  return c.out;
}

// ---------------------------------------------------------------------------
// 8. Invariant suites over generated cases.
Outcome criterion_invariants() {
  Check c;
  long cases = 0;

  // Value bounds on random evaluations.
  for (int trial = 0; trial < 300; ++trial) {
    TabularMDP mdp = random_tabular_mdp(3, 2, 4, 52'000 + trial);
    PolicyEvaluation ev = exact_policy_value(mdp, Policy::uniform(4, 3, 2));
    for (int h = 0; h < 4; ++h)
      for (int s = 0; s < 3; ++s) {
        double v = ev.V[static_cast<std::size_t>(h) * 3 + s];
        if (v < -1e-12 || v > 4.0 - h + 1e-12)
          c.expect(false, "value bound violated at trial " + std::to_string(trial));
        ++cases;
      }
  }

  // Kernel rows are probability vectors after projection.
  Rng rng = make_rng(99);
  std::uniform_real_distribution<double> unif(0.0, 10.0);
  for (int trial = 0; trial < 300; ++trial) {
    CountTables noisy;
    noisy.S = 4;
    noisy.A = 2;
    noisy.H = 1;
    noisy.sa.resize(8);
    noisy.sas.resize(32);
    for (double& v : noisy.sa) v = unif(rng);
    for (double& v : noisy.sas) v = unif(rng);
    CountTables tilde = consistent_counts(noisy, 2.0);
    std::vector<double> kernel = private_kernel(tilde, 2.0);
    for (int s = 0; s < 4; ++s)
      for (int a = 0; a < 2; ++a) {
        double sum = 0.0;
        for (int s2 = 0; s2 < 4; ++s2) sum += kernel[tilde.sas_idx(0, s, a, s2)];
        if (std::abs(sum - 1.0) > 1e-12) c.expect(false, "kernel row sum " + fmt(sum));
        ++cases;
      }
  }

  // Clipping bounds of the linear learner, private and noiseless runs.
  LinearMDP env = build_appendix_f_mdp(4, 21);
  TabularMDP tab = tabularize(env);
  Policy mu = behavior_policy_appendix_f(0.6, env.H, env.S, env.A);
  for (int trial = 0; trial < 6; ++trial) {
    Dataset data = sample_dataset(tab, mu, 60, 500 + trial);
    VapviConfig cfg;
    cfg.rho = trial % 2 ? 2.0 : 0.0;
    LearnedPolicy lp = dp_vapvi(data, data, env, cfg, trial);
    StepNoise zero;
    zero.phi1 = Eigen::VectorXd::Zero(env.d);
    zero.phi2 = Eigen::VectorXd::Zero(env.d);
    zero.phi3 = Eigen::VectorXd::Zero(env.d);
    zero.k1 = Eigen::MatrixXd::Zero(env.d, env.d);
    zero.k2 = Eigen::MatrixXd::Zero(env.d, env.d);
    for (int h = 0; h < env.H; ++h) {
      std::vector<double> v_next(env.S, 0.0);
      if (h + 1 < env.H)
        for (int s = 0; s < env.S; ++s)
          v_next[s] = lp.v_tilde[static_cast<std::size_t>(h + 1) * env.S + s];
      std::vector<double> s2 =
          estimate_variance(data, env, v_next, cfg.lambda, zero, h);
      double cap = static_cast<double>(env.H - h);
      for (double v : s2) {
        if (v < 1.0 || v > cap * cap + 1e-9)
          c.expect(false, "sigma^2 out of range: " + fmt(v));
        ++cases;
      }
      for (int s = 0; s < env.S; ++s)
        for (int a = 0; a < env.A; ++a) {
          double q = lp.q_bar[(static_cast<std::size_t>(h) * env.S + s) * env.A + a];
          if (q < 0.0 || q > cap) c.expect(false, "q out of range: " + fmt(q));
          ++cases;
        }
    }
  }

  // Noise matrices are exactly symmetric.
  for (int trial = 0; trial < 300; ++trial) {
    auto k = privacy::symmetric_noise_matrix({5, 0.3, 1.0},
                                             static_cast<std::uint64_t>(trial));
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        if (k[i * 5 + j] != k[j * 5 + i]) c.expect(false, "asymmetric noise");
        ++cases;
      }
  }

  // Determinism of sampling and both learners.
  {
    TabularMDP mdp = random_tabular_mdp(3, 2, 4, 8);
    Policy u = Policy::uniform(4, 3, 2);
    c.expect(sample_dataset(mdp, u, 200, 3) == sample_dataset(mdp, u, 200, 3),
             "sample_dataset not deterministic");
    Dataset data = sample_dataset(mdp, u, 200, 3);
    ApviConfig acfg;
    acfg.budget = privacy::PrivacyBudget::zcdp(0.7);
    LearnedPolicy a1 = dp_apvi(data, 3, 2, 4, mdp.r, acfg, 5);
    LearnedPolicy a2 = dp_apvi(data, 3, 2, 4, mdp.r, acfg, 5);
    c.expect(a1.q_bar == a2.q_bar && a1.policy == a2.policy,
             "dp_apvi not deterministic");
    Dataset lin_data = sample_dataset(tab, mu, 50, 4);
    VapviConfig vcfg;
    vcfg.rho = 1.0;
    LearnedPolicy v1 = dp_vapvi(lin_data, lin_data, env, vcfg, 6);
    LearnedPolicy v2 = dp_vapvi(lin_data, lin_data, env, vcfg, 6);
    c.expect(v1.q_bar == v2.q_bar && v1.policy == v2.policy,
             "dp_vapvi not deterministic");
    cases += 3;
  }

  c.expect(cases >= 1000, "only " + std::to_string(cases) + " generated cases");
  if (c.out.pass) c.note(std::to_string(cases) + " generated cases");
  return c.out;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"1. noiseless reduction (dp-apvi==apvi, dp-vapvi==vapvi)",
       criterion_noiseless_reduction},
      {"2. consistency projection optimality", criterion_lp_projection},
      {"3. projection error bound under bounded noise",
       criterion_projection_error_bound},
      {"4. privacy accounting and mechanism calibration",
       criterion_privacy_accounting},
      {"5. exact evaluator vs monte carlo", criterion_evaluator_crosscheck},
      {"6. linear MDP simulation trends", criterion_linear_trends},
      {"7. tabular learner sanity", criterion_tabular_sanity},
      {"8. invariant suites", criterion_invariants},
  };
  int failures = 0;
  for (const Criterion& crit : criteria) {
    Outcome out = crit.run();
    std::printf("[%s] %s%s%s\n", out.pass ? "PASS" : "FAIL", crit.name,
                out.detail.empty() ? "" : " -- ", out.detail.c_str());
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failures);
  return failures;
}
