#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "dporl/count_release.hpp"
#include "dporl/harness.hpp"
#include "oracles.hpp"

using namespace dporl;

namespace {

Dataset tiny_dataset() {
  // Two trajectories over S=2, A=2, H=2.
  Dataset d;
  d.H = 2;
  d.count = 2;
  d.s = {0, 1, 1, 0};
  d.a = {0, 1, 1, 0};
  d.r = {1, 0, 0, 1};
  d.s_next = {1, 0, 0, 1};
  return d;
}

}  // namespace

TEST_CASE("raw_counts tallies and conserves mass") {
  Dataset empty;
  empty.H = 2;
  empty.count = 0;
  CountTables zero = raw_counts(empty, 2, 2, 2);
  for (double v : zero.sa) CHECK(v == 0.0);
  for (double v : zero.sas) CHECK(v == 0.0);

  Dataset one = tiny_dataset();
  one.count = 1;
  one.s.resize(2);
  one.a.resize(2);
  one.r.resize(2);
  one.s_next.resize(2);
  CountTables single = raw_counts(one, 2, 2, 2);
  for (int h = 0; h < 2; ++h) {
    double total = 0.0;
    int nonzero = 0;
    for (int s = 0; s < 2; ++s)
      for (int a = 0; a < 2; ++a) {
        double v = single.sa[single.sa_idx(h, s, a)];
        total += v;
        if (v != 0.0) ++nonzero;
      }
    CHECK(total == 1.0);
    CHECK(nonzero == 1);
  }

  TabularMDP mdp = random_tabular_mdp(3, 2, 4, 11);
  Dataset big = sample_dataset(mdp, Policy::uniform(4, 3, 2), 1000, 5);
  CountTables counts = raw_counts(big, 3, 2, 4);
  for (int h = 0; h < 4; ++h) {
    double total = 0.0;
    for (int s = 0; s < 3; ++s)
      for (int a = 0; a < 2; ++a) {
        total += counts.sa[counts.sa_idx(h, s, a)];
        double children = 0.0;
        for (int s2 = 0; s2 < 3; ++s2)
          children += counts.sas[counts.sas_idx(h, s, a, s2)];
        CHECK(children == counts.sa[counts.sa_idx(h, s, a)]);
      }
    CHECK(total == 1000.0);
  }

  Dataset bad = tiny_dataset();
  bad.s[0] = 7;
  CHECK_THROWS_AS(raw_counts(bad, 2, 2, 2), std::invalid_argument);
}

TEST_CASE("noisy_counts noiseless mode and clamping") {
  CountTables raw = raw_counts(tiny_dataset(), 2, 2, 2);
  ReleaseParams off(privacy::PrivacyBudget::zcdp(0.0), 0.1, 2, 2, 2);
  Rng rng = make_rng(1);
  CountTables same = noisy_counts(raw, off, rng);
  CHECK(same.sa == raw.sa);
  CHECK(same.sas == raw.sas);
  CHECK(off.e_bound() == 0.0);
  CHECK(off.sigma2() == 0.0);

  ReleaseParams on(privacy::PrivacyBudget::zcdp(0.5), 0.1, 2, 2, 2);
  CHECK(on.sigma2() == doctest::Approx(2.0 * 2 / 0.5));
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng r2 = make_rng(seed);
    CountTables noisy = noisy_counts(raw, on, r2);
    for (double v : noisy.sa) CHECK(v >= 0.0);
    for (double v : noisy.sas) CHECK(v >= 0.0);
  }
}

TEST_CASE("noisy_counts charges the accountant") {
  CountTables raw = raw_counts(tiny_dataset(), 2, 2, 2);
  ReleaseParams params(privacy::PrivacyBudget::zcdp(1.4), 0.1, 2, 2, 2);
  privacy::Accountant acct;
  Rng rng = make_rng(3);
  noisy_counts(raw, params, rng, &acct);
  CHECK(acct.release_count() == 2);
  CHECK(acct.total() == doctest::Approx(1.4));

  ReleaseParams pure(privacy::PrivacyBudget::pure_dp(2.0), 0.1, 2, 2, 2);
  CHECK(pure.laplace_scale() == doctest::Approx(4.0 * 2 / 2.0));
  privacy::Accountant acct2;
  Rng rng2 = make_rng(4);
  noisy_counts(raw, pure, rng2, &acct2);
  CHECK(acct2.release_count() == 1);
  CHECK(acct2.total() == doctest::Approx(2.0));
}

TEST_CASE("gaussian count noise respects the uniform bound empirically") {
  // Single raw count, many repetitions: |n' - n| <= E/2 at least a
  // 1 - delta/(4HS^2A) fraction of the time.
  ReleaseParams params(privacy::PrivacyBudget::zcdp(1.0), 0.1, 2, 2, 1);
  CountTables raw;
  raw.S = 2;
  raw.A = 2;
  raw.H = 1;
  raw.sa.assign(4, 0.0);
  raw.sas.assign(8, 0.0);
  raw.sa[0] = 50.0;
  raw.sas[0] = 30.0;
  raw.sas[1] = 20.0;
  const double half = params.e_bound() / 2.0;
  Rng rng = make_rng(77);
  int within = 0;
  const int reps = 10000;
  for (int it = 0; it < reps; ++it) {
    CountTables noisy = noisy_counts(raw, params, rng);
    if (std::abs(noisy.sa[0] - raw.sa[0]) <= half) ++within;
  }
  double needed = 1.0 - 0.1 / (4.0 * 1 * 2 * 2 * 2);
  CHECK(static_cast<double>(within) / reps >= needed - 0.01);
}

TEST_CASE("project_row worked examples") {
  // Sum must rise 8 -> 9, split evenly.
  std::vector<double> row1{5.0, 3.0};
  ProjectedRow p1 = project_row(row1, 10.0, 1.0);
  CHECK(p1.x[0] == doctest::Approx(5.5).epsilon(1e-12));
  CHECK(p1.x[1] == doctest::Approx(3.5).epsilon(1e-12));
  CHECK(p1.objective == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p1.parent == doctest::Approx(9.0).epsilon(1e-12));

  // Already consistent: untouched, objective 0.
  std::vector<double> row2{4.0, 6.0};
  ProjectedRow p2 = project_row(row2, 10.0, 1.0);
  CHECK(p2.x == row2);
  CHECK(p2.objective == 0.0);

  // Raise both equally to reach sum 4.5.
  std::vector<double> row3{0.2, 0.1};
  ProjectedRow p3 = project_row(row3, 5.0, 0.5);
  CHECK(p3.objective == doctest::Approx(2.1).epsilon(1e-12));
  CHECK(p3.x[0] == doctest::Approx(2.3).epsilon(1e-12));
  CHECK(p3.x[1] == doctest::Approx(2.2).epsilon(1e-12));
}

TEST_CASE("project_row matches the closed-form oracle on random instances") {
  Rng rng = make_rng(2023);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 6);
  for (int it = 0; it < 500; ++it) {
    int S = dim(rng);
    std::vector<double> row(S);
    for (double& v : row) v = 20.0 * unif(rng);
    double parent = 40.0 * unif(rng);
    double band = 5.0 * unif(rng);
    ProjectedRow sol = project_row(row, parent, band);
    double oracle = oracles::lp_min_objective(row, parent, band);
    CHECK(std::abs(sol.objective - oracle) < 1e-9);
    // All constraints hold.
    double sum = std::accumulate(sol.x.begin(), sol.x.end(), 0.0);
    CHECK(std::abs(sum - parent) <= band + 1e-9);
    for (double v : sol.x) CHECK(v >= 0.0);
    CHECK(sol.parent == doctest::Approx(sum));
    for (int i = 0; i < S; ++i)
      CHECK(std::abs(sol.x[i] - row[i]) <= sol.objective + 1e-12);
  }
}

TEST_CASE("consistent_counts keeps children and parents matched exactly") {
  TabularMDP mdp = random_tabular_mdp(4, 2, 3, 6);
  Dataset data = sample_dataset(mdp, Policy::uniform(3, 4, 2), 400, 12);
  CountTables raw = raw_counts(data, 4, 2, 3);
  ReleaseParams params(privacy::PrivacyBudget::zcdp(2.0), 0.1, 4, 2, 3);
  Rng rng = make_rng(9);
  CountTables noisy = noisy_counts(raw, params, rng);
  CountTables tilde = consistent_counts(noisy, params.e_bound());
  for (int h = 0; h < 3; ++h)
    for (int s = 0; s < 4; ++s)
      for (int a = 0; a < 2; ++a) {
        double children = 0.0;
        for (int s2 = 0; s2 < 4; ++s2)
          children += tilde.sas[tilde.sas_idx(h, s, a, s2)];
        CHECK(tilde.sa[tilde.sa_idx(h, s, a)] == children);
      }
}

TEST_CASE("projection error bound holds under bounded noise") {
  // With |n' - n| <= E/2 entrywise the projected counts stay within E of the
  // truth, both children and parents.
  Rng rng = make_rng(31337);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::uniform_real_distribution<double> mag(0.0, 30.0);
  std::uniform_int_distribution<int> dim(1, 6);
  const double e_bound = 3.0;
  for (int it = 0; it < 1000; ++it) {
    int S = dim(rng);
    std::vector<double> truth(S);
    for (double& v : truth) v = std::floor(mag(rng));
    double parent_truth = std::accumulate(truth.begin(), truth.end(), 0.0);
    std::vector<double> noisy(S);
    for (int i = 0; i < S; ++i)
      noisy[i] = std::max(0.0, truth[i] + unif(rng) * e_bound / 2.0);
    double parent_noisy =
        std::max(0.0, parent_truth + unif(rng) * e_bound / 2.0);
    ProjectedRow sol = project_row(noisy, parent_noisy, e_bound / 2.0);
    for (int i = 0; i < S; ++i) CHECK(std::abs(sol.x[i] - truth[i]) <= e_bound);
    CHECK(std::abs(sol.parent - parent_truth) <= e_bound);
  }
}

TEST_CASE("private_kernel rows are probability vectors with uniform fallback") {
  // Two (h,s,a) rows over S=2: parents 10 and 3 against bound 4.
  CountTables tilde;
  tilde.S = 2;
  tilde.A = 1;
  tilde.H = 1;
  tilde.sa = {10.0, 3.0};
  tilde.sas = {6.0, 4.0, 2.0, 1.0};
  std::vector<double> kernel = private_kernel(tilde, 4.0);
  CHECK(kernel[0] == doctest::Approx(0.6));
  CHECK(kernel[1] == doctest::Approx(0.4));
  // Parent 3 <= bound 4: uniform fallback.
  CHECK(kernel[2] == doctest::Approx(0.5));
  CHECK(kernel[3] == doctest::Approx(0.5));
}

TEST_CASE("noiseless private kernel equals the empirical estimator") {
  TabularMDP mdp = random_tabular_mdp(3, 2, 3, 14);
  Dataset data = sample_dataset(mdp, Policy::uniform(3, 3, 2), 300, 4);
  CountTables raw = raw_counts(data, 3, 2, 3);
  std::vector<double> kernel = private_kernel(raw, 0.0);
  for (int h = 0; h < 3; ++h)
    for (int s = 0; s < 3; ++s)
      for (int a = 0; a < 2; ++a) {
        double parent = raw.sa[raw.sa_idx(h, s, a)];
        for (int s2 = 0; s2 < 3; ++s2) {
          double expected =
              parent > 0.0 ? raw.sas[raw.sas_idx(h, s, a, s2)] / parent
                           : 1.0 / 3.0;
          CHECK(kernel[raw.sas_idx(h, s, a, s2)] == doctest::Approx(expected));
        }
      }
}

TEST_CASE("kernel rows always sum to one") {
  Rng rng = make_rng(555);
  std::uniform_real_distribution<double> unif(0.0, 10.0);
  for (int it = 0; it < 1000; ++it) {
    CountTables noisy;
    noisy.S = 3;
    noisy.A = 2;
    noisy.H = 2;
    noisy.sa.resize(12);
    noisy.sas.resize(36);
    for (double& v : noisy.sa) v = unif(rng);
    for (double& v : noisy.sas) v = unif(rng);
    CountTables tilde = consistent_counts(noisy, 1.5);
    std::vector<double> kernel = private_kernel(tilde, 1.5);
    for (int h = 0; h < 2; ++h)
      for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 2; ++a) {
          double sum = 0.0;
          for (int s2 = 0; s2 < 3; ++s2)
            sum += kernel[tilde.sas_idx(h, s, a, s2)];
          CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
  }
}
