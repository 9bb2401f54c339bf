#include "dporl/privacy.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dporl::privacy {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

PrivacyBudget PrivacyBudget::zcdp(double rho) {
  require(rho >= 0.0, "privacy: rho must be >= 0");
  return {BudgetKind::zcdp, rho, 0.0, 0.0};
}

PrivacyBudget PrivacyBudget::pure_dp(double epsilon) {
  require(epsilon >= 0.0, "privacy: epsilon must be >= 0");
  return {BudgetKind::pure_dp, 0.0, epsilon, 0.0};
}

PrivacyBudget PrivacyBudget::approx_dp(double epsilon, double delta) {
  require(epsilon >= 0.0, "privacy: epsilon must be >= 0");
  require(delta > 0.0 && delta < 1.0, "privacy: delta must be in (0,1)");
  return {BudgetKind::approx_dp, 0.0, epsilon, delta};
}

bool PrivacyBudget::noiseless() const {
  return kind == BudgetKind::zcdp ? rho == 0.0 : epsilon == 0.0;
}

void Accountant::charge(std::string name, double sensitivity, double budget,
                        double sigma) {
  require(budget >= 0.0, "accountant: negative budget release");
  releases_.push_back({std::move(name), sensitivity, budget, sigma});
}

double Accountant::total() const {
  double t = 0.0;
  for (const auto& r : releases_) t += r.budget;
  return t;
}

void Accountant::expect_total(double expected) const {
  double t = total();
  if (std::abs(t - expected) > 1e-9 * std::max(1.0, std::abs(expected))) {
    std::ostringstream os;
    os << "accountant: ledger total " << t << " != configured budget "
       << expected;
    throw std::logic_error(os.str());
  }
}

std::string Accountant::to_text() const {
  std::ostringstream os;
  os << "release sensitivity budget sigma\n";
  os.precision(17);
  for (const auto& r : releases_)
    os << r.name << ' ' << r.sensitivity << ' ' << r.budget << ' ' << r.sigma
       << '\n';
  os << "total " << total() << '\n';
  return os.str();
}

std::pair<std::vector<double>, double> gaussian_mechanism(
    std::span<const double> x, double delta2, double rho, Rng& rng) {
  require(rho >= 0.0, "gaussian_mechanism: rho must be >= 0");
  require(delta2 > 0.0, "gaussian_mechanism: sensitivity must be > 0");
  std::vector<double> out(x.begin(), x.end());
  if (rho == 0.0) return {out, 0.0};
  double sigma = delta2 / std::sqrt(2.0 * rho);
  std::normal_distribution<double> gauss(0.0, sigma);
  for (double& v : out) v += gauss(rng);
  return {out, sigma};
}

std::pair<std::vector<double>, double> gaussian_mechanism(
    std::span<const double> x, double delta2, double rho, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return gaussian_mechanism(x, delta2, rho, rng);
}

double laplace_sample(double scale, Rng& rng) {
  // Inverse CDF of the double-exponential.
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  double u = unif(rng);
  return -scale * (u < 0.0 ? -1.0 : 1.0) * std::log(1.0 - 2.0 * std::abs(u));
}

std::vector<double> laplace_mechanism(std::span<const double> x, double delta1,
                                      double eps, Rng& rng) {
  require(eps >= 0.0, "laplace_mechanism: eps must be >= 0");
  require(delta1 > 0.0, "laplace_mechanism: sensitivity must be > 0");
  std::vector<double> out(x.begin(), x.end());
  if (eps == 0.0) return out;
  double scale = delta1 / eps;
  for (double& v : out) v += laplace_sample(scale, rng);
  return out;
}

std::vector<double> laplace_mechanism(std::span<const double> x, double delta1,
                                      double eps, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return laplace_mechanism(x, delta1, eps, rng);
}

double compose_zcdp(std::span<const double> budgets) {
  double total = 0.0;
  for (double b : budgets) {
    require(b >= 0.0, "compose_zcdp: budgets must be >= 0");
    total += b;
  }
  return total;
}

double zcdp_to_approx_dp(double rho, double delta) {
  require(rho >= 0.0, "zcdp_to_approx_dp: rho must be >= 0");
  require(delta > 0.0 && delta < 1.0, "zcdp_to_approx_dp: delta must be in (0,1)");
  return rho + 2.0 * std::sqrt(rho * std::log(1.0 / delta));
}

std::vector<double> symmetric_noise_matrix(const NoiseMatrixSpec& spec,
                                           Rng& rng) {
  require(spec.d >= 1, "symmetric_noise_matrix: d must be >= 1");
  require(spec.rho0 >= 0.0, "symmetric_noise_matrix: rho0 must be >= 0");
  require(spec.shift >= 0.0, "symmetric_noise_matrix: shift must be >= 0");
  const int d = spec.d;
  std::vector<double> k(static_cast<std::size_t>(d) * d, 0.0);
  for (int i = 0; i < d; ++i) k[static_cast<std::size_t>(i) * d + i] = spec.shift / 2.0;
  if (spec.rho0 == 0.0) return k;

  std::normal_distribution<double> gauss(0.0, std::sqrt(1.0 / (4.0 * spec.rho0)));
  std::vector<double> z(static_cast<std::size_t>(d) * d);
  for (double& v : z) v = gauss(rng);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      double sym = (z[static_cast<std::size_t>(i) * d + j] +
                    z[static_cast<std::size_t>(j) * d + i]) *
                   inv_sqrt2;
      k[static_cast<std::size_t>(i) * d + j] += sym;
      if (j != i) k[static_cast<std::size_t>(j) * d + i] = k[static_cast<std::size_t>(i) * d + j];
    }
  return k;
}

std::vector<double> symmetric_noise_matrix(const NoiseMatrixSpec& spec,
                                           std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return symmetric_noise_matrix(spec, rng);
}

}  // namespace dporl::privacy
