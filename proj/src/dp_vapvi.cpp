#include "dporl/dp_vapvi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dporl/privacy.hpp"

namespace dporl {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

Eigen::VectorXd feature(const LinearMDP& env, int s, int a) {
  auto f = env.phi_at(s, a);
  return Eigen::Map<const Eigen::VectorXd>(f.data(), f.size());
}

// Greedy extraction shared by all three learners: clip the linear Q to
// [0, H-h] (0-based h), take the lowest-index argmax per state.
// step_bonus is indexed [s*A+a].
void greedy_step(const LinearMDP& env, const Eigen::VectorXd& w,
                 const std::vector<double>& step_bonus, int h,
                 LearnedPolicy& out, std::vector<double>& v_now,
                 std::vector<int>& actions) {
  const int S = env.S, A = env.A, H = env.H;
  const double vmax = static_cast<double>(H - h);
  for (int s = 0; s < S; ++s) {
    double best = -1.0;
    int best_a = 0;
    for (int a = 0; a < A; ++a) {
      std::size_t qi = (static_cast<std::size_t>(h) * S + s) * A + a;
      double gamma = step_bonus[static_cast<std::size_t>(s) * A + a];
      double q = std::clamp(feature(env, s, a).dot(w) - gamma, 0.0, vmax);
      out.q_bar[qi] = q;
      out.bonus[qi] = gamma;
      if (q > best) {
        best = q;
        best_a = a;
      }
    }
    out.v_tilde[static_cast<std::size_t>(h) * S + s] = best;
    actions[static_cast<std::size_t>(h) * S + s] = best_a;
    v_now[s] = best;
  }
}

}  // namespace

PessimismConstants compute_constants(int H, int d, double rho, double delta,
                                     double kappa, const VapviConfig& cfg) {
  require(H >= 1 && d >= 1, "compute_constants: bad dimensions");
  require(rho >= 0.0, "compute_constants: rho must be >= 0");
  require(delta > 0.0 && delta < 1.0, "compute_constants: delta in (0,1)");
  PessimismConstants k;
  k.kappa = kappa;
  if (rho == 0.0) return k;  // noiseless: rho0 = L = E = D = 0

  k.rho0 = rho / (5.0 * H);
  k.L = 2.0 * H * std::sqrt(d / k.rho0 * std::log(10.0 * H * d / delta));
  k.E = std::sqrt(2.0 * d / k.rho0) *
        (2.0 + std::pow(std::log(5.0 * cfg.c1 * H / delta) / (cfg.c2 * d),
                        2.0 / 3.0));
  if (cfg.pessimism_mode == VapviConfig::PessimismMode::theory) {
    require(kappa > 0.0, "compute_constants: theory mode needs kappa > 0");
    k.D = cfg.c_d * (H * H * k.L / kappa +
                     std::pow(H, 4) * k.E * std::sqrt(d) / std::pow(kappa, 1.5) +
                     std::pow(H, 3) * std::sqrt(d));
  }
  return k;
}

double feature_coverage_kappa(const LinearMDP& env, const Policy& mu) {
  TabularMDP tab = tabularize(env);
  OccupancyTable occ = occupancy(tab, mu);
  double kappa = 0.0;
  for (int h = 0; h < env.H; ++h) {
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(env.d, env.d);
    for (int s = 0; s < env.S; ++s)
      for (int a = 0; a < env.A; ++a) {
        double w = occ.at(h, s, a);
        if (w == 0.0) continue;
        Eigen::VectorXd f = feature(env, s, a);
        sigma.noalias() += w * f * f.transpose();
      }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
    double lam = eig.eigenvalues().minCoeff();
    if (h == 0 || lam < kappa) kappa = lam;
  }
  return kappa;
}

std::vector<double> estimate_variance(const Dataset& data_prime,
                                      const LinearMDP& env,
                                      const std::vector<double>& v_next,
                                      double lambda, const StepNoise& noise,
                                      int h) {
  const int S = env.S, A = env.A, H = env.H, d = env.d;
  require(v_next.size() == static_cast<std::size_t>(S),
          "estimate_variance: v_next size mismatch");
  const double vmax = static_cast<double>(H - h);  // paper's H-h+1

  std::vector<Eigen::VectorXd> feats;
  std::vector<double> sq_targets, lin_targets;
  feats.reserve(data_prime.count);
  for (std::int64_t t = 0; t < data_prime.count; ++t) {
    std::size_t i = data_prime.idx(t, h);
    feats.push_back(feature(env, data_prime.s[i], data_prime.a[i]));
    double v = v_next[data_prime.s_next[i]];
    sq_targets.push_back(v * v);
    lin_targets.push_back(v);
  }
  std::vector<double> unit(feats.size(), 1.0);

  RidgeResult beta =
      weighted_ridge(feats, sq_targets, unit, lambda, noise.phi1, noise.k1);
  // The linear term reuses the same noised Gram matrix, only the right-hand
  // side differs.
  Eigen::VectorXd theta = spd_solve(beta.acc, [&] {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
    for (std::size_t i = 0; i < feats.size(); ++i)
      rhs.noalias() += lin_targets[i] * feats[i];
    rhs += noise.phi2;
    return rhs;
  }());

  std::vector<double> sigma2(static_cast<std::size_t>(S) * A, 1.0);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      Eigen::VectorXd f = feature(env, s, a);
      double second = std::clamp(f.dot(beta.w), 0.0, vmax * vmax);
      double first = std::clamp(f.dot(theta), 0.0, vmax);
      double var = second - first * first;
      sigma2[static_cast<std::size_t>(s) * A + a] = std::max(1.0, var);
    }
  return sigma2;
}

LearnedPolicy dp_vapvi(const Dataset& data, const Dataset& data_prime,
                       const LinearMDP& env, const VapviConfig& cfg,
                       std::uint64_t seed) {
  require(data.H == env.H && data_prime.H == env.H,
          "dp_vapvi: dataset horizon mismatch");
  require(data.count == data_prime.count,
          "dp_vapvi: the two splits must have equal length");
  require(cfg.lambda > 0.0, "dp_vapvi: lambda must be > 0");
  require(cfg.rho >= 0.0, "dp_vapvi: rho must be >= 0");

  const int S = env.S, A = env.A, H = env.H, d = env.d;
  const std::int64_t K = data.count;
  PessimismConstants consts =
      compute_constants(H, d, cfg.rho, cfg.delta, cfg.kappa, cfg);

  privacy::Accountant acct;
  Rng rng = make_rng(seed);
  const Eigen::VectorXd zero_vec = Eigen::VectorXd::Zero(d);

  // All 5H noise draws are taken up front, in a fixed order independent of
  // the data, so the noiseless path consumes the generator identically
  // (not at all) and reductions stay exact.
  std::vector<StepNoise> noises(H);
  for (int h = 0; h < H; ++h) {
    StepNoise& n = noises[h];
    auto [p1, s1] = privacy::gaussian_mechanism(
        std::span<const double>(zero_vec.data(), d), 2.0 * H * H, consts.rho0,
        rng);
    auto [p2, s2] = privacy::gaussian_mechanism(
        std::span<const double>(zero_vec.data(), d), 2.0 * H, consts.rho0, rng);
    auto [p3, s3] = privacy::gaussian_mechanism(
        std::span<const double>(zero_vec.data(), d), 2.0 * H, consts.rho0, rng);
    n.phi1 = Eigen::Map<Eigen::VectorXd>(p1.data(), d);
    n.phi2 = Eigen::Map<Eigen::VectorXd>(p2.data(), d);
    n.phi3 = Eigen::Map<Eigen::VectorXd>(p3.data(), d);
    const double sens_gram = 1.0 / std::sqrt(2.0);
    privacy::NoiseMatrixSpec spec{d, consts.rho0, consts.E};
    std::vector<double> k1 = privacy::symmetric_noise_matrix(spec, rng);
    std::vector<double> k2 = privacy::symmetric_noise_matrix(spec, rng);
    n.k1 = Eigen::Map<Eigen::MatrixXd>(k1.data(), d, d);
    n.k2 = Eigen::Map<Eigen::MatrixXd>(k2.data(), d, d);
    double sigma_gram =
        consts.rho0 > 0.0 ? std::sqrt(1.0 / (4.0 * consts.rho0)) : 0.0;
    acct.charge("phi1[h=" + std::to_string(h) + "]", 2.0 * H * H, consts.rho0, s1);
    acct.charge("phi2[h=" + std::to_string(h) + "]", 2.0 * H, consts.rho0, s2);
    acct.charge("phi3[h=" + std::to_string(h) + "]", 2.0 * H, consts.rho0, s3);
    acct.charge("K1[h=" + std::to_string(h) + "]", sens_gram, consts.rho0, sigma_gram);
    acct.charge("K2[h=" + std::to_string(h) + "]", sens_gram, consts.rho0, sigma_gram);
  }
  acct.expect_total(cfg.rho);

  LearnedPolicy out;
  out.q_bar.assign(static_cast<std::size_t>(H) * S * A, 0.0);
  out.v_tilde.assign(static_cast<std::size_t>(H) * S, 0.0);
  out.bonus.assign(static_cast<std::size_t>(H) * S * A, 0.0);
  std::vector<int> actions(static_cast<std::size_t>(H) * S, 0);

  std::vector<double> v_next(S, 0.0), v_now(S, 0.0);
  std::vector<double> step_bonus(static_cast<std::size_t>(S) * A, 0.0);
  double min_eig_seen = std::numeric_limits<double>::infinity();
  bool any_clamped = false;

  for (int h = H - 1; h >= 0; --h) {
    std::vector<double> sigma2 =
        estimate_variance(data_prime, env, v_next, cfg.lambda, noises[h], h);

    std::vector<Eigen::VectorXd> feats;
    std::vector<double> targets, weights;
    feats.reserve(K);
    for (std::int64_t t = 0; t < K; ++t) {
      std::size_t i = data.idx(t, h);
      int s = data.s[i], a = data.a[i];
      feats.push_back(feature(env, s, a));
      targets.push_back(data.r[i] + v_next[data.s_next[i]]);
      weights.push_back(sigma2[static_cast<std::size_t>(s) * A + a]);
    }
    RidgeResult reg = weighted_ridge(feats, targets, weights, cfg.lambda,
                                     noises[h].phi3, noises[h].k2);
    min_eig_seen = std::min(min_eig_seen, reg.acc.min_eigenvalue);
    any_clamped = any_clamped || reg.acc.clamped;

    // Elliptical bonus + the additive privacy term.
    double d_over_k = 0.0;
    if (consts.D > 0.0)
      d_over_k = K > 0 ? consts.D / static_cast<double>(K)
                       : std::numeric_limits<double>::infinity();
    Eigen::MatrixXd lambda_inv = reg.acc.M.inverse();
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        Eigen::VectorXd f = feature(env, s, a);
        double quad = std::max(0.0, f.dot(lambda_inv * f));
        step_bonus[static_cast<std::size_t>(s) * A + a] =
            cfg.c_bonus * std::sqrt(static_cast<double>(d)) * std::sqrt(quad) +
            d_over_k;
      }
    greedy_step(env, reg.w, step_bonus, h, out, v_now, actions);
    v_next = v_now;
  }

  out.policy = Policy::deterministic(H, S, A, std::move(actions));
  out.ledger_text = acct.to_text();
  out.diagnostics["rho0"] = consts.rho0;
  out.diagnostics["L"] = consts.L;
  out.diagnostics["E"] = consts.E;
  out.diagnostics["D"] = consts.D;
  out.diagnostics["kappa"] = consts.kappa;
  out.diagnostics["budget_total"] = acct.total();
  out.diagnostics["releases"] = static_cast<double>(acct.release_count());
  out.diagnostics["min_eigenvalue"] = min_eig_seen;
  out.diagnostics["eig_clamped"] = any_clamped ? 1.0 : 0.0;
  // Theory-condition sample gates with unit constants, reported but never
  // enforced; infinite when the environment has no feature coverage.
  {
    const double kap = consts.kappa;
    const double logt = std::log(2.0 * d * H / cfg.delta);
    const double inf = std::numeric_limits<double>::infinity();
    double h4 = std::pow(H, 4);
    out.diagnostics["gate_m1"] =
        kap > 0.0 ? std::max({2.0 * cfg.lambda, 128.0 * logt,
                              128.0 * h4 * logt / (kap * kap),
                              std::sqrt(2.0) * consts.L / std::sqrt(d * kap)})
                  : inf;
    out.diagnostics["gate_m3"] =
        kap > 0.0 ? std::max(512.0 * h4 * logt / (kap * kap),
                             4.0 * cfg.lambda * H * H / kap)
                  : inf;
    out.diagnostics["gate_m4"] =
        kap > 0.0 ? std::max({H * H * consts.L * consts.L / (d * kap),
                              std::pow(H, 6) * consts.E * consts.E / (kap * kap),
                              h4 * kap})
                  : inf;
  }
  return out;
}

LearnedPolicy vapvi(const Dataset& data, const Dataset& data_prime,
                    const LinearMDP& env, VapviConfig cfg) {
  cfg.rho = 0.0;
  return dp_vapvi(data, data_prime, env, cfg, 0);
}

LearnedPolicy pevi(const Dataset& data, const LinearMDP& env,
                   const VapviConfig& cfg) {
  require(data.H == env.H, "pevi: dataset horizon mismatch");
  require(cfg.lambda > 0.0, "pevi: lambda must be > 0");
  const int S = env.S, A = env.A, H = env.H, d = env.d;
  const std::int64_t K = data.count;
  const double iota =
      std::log(2.0 * d * static_cast<double>(std::max<std::int64_t>(K, 1)) /
               cfg.delta);
  const double beta = cfg.c_bonus * d * H * std::sqrt(iota);

  LearnedPolicy out;
  out.q_bar.assign(static_cast<std::size_t>(H) * S * A, 0.0);
  out.v_tilde.assign(static_cast<std::size_t>(H) * S, 0.0);
  out.bonus.assign(static_cast<std::size_t>(H) * S * A, 0.0);
  std::vector<int> actions(static_cast<std::size_t>(H) * S, 0);

  std::vector<double> v_next(S, 0.0), v_now(S, 0.0);
  std::vector<double> step_bonus(static_cast<std::size_t>(S) * A, 0.0);
  const Eigen::VectorXd zero_vec = Eigen::VectorXd::Zero(d);
  const Eigen::MatrixXd zero_mat;

  for (int h = H - 1; h >= 0; --h) {
    std::vector<Eigen::VectorXd> feats;
    std::vector<double> targets, unit;
    feats.reserve(K);
    for (std::int64_t t = 0; t < K; ++t) {
      std::size_t i = data.idx(t, h);
      feats.push_back(feature(env, data.s[i], data.a[i]));
      targets.push_back(data.r[i] + v_next[data.s_next[i]]);
      unit.push_back(1.0);
    }
    RidgeResult reg =
        weighted_ridge(feats, targets, unit, cfg.lambda, zero_vec, zero_mat);
    Eigen::MatrixXd lambda_inv = reg.acc.M.inverse();
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        Eigen::VectorXd f = feature(env, s, a);
        double quad = std::max(0.0, f.dot(lambda_inv * f));
        step_bonus[static_cast<std::size_t>(s) * A + a] = beta * std::sqrt(quad);
      }
    greedy_step(env, reg.w, step_bonus, h, out, v_now, actions);
    v_next = v_now;
  }

  out.policy = Policy::deterministic(H, S, A, std::move(actions));
  out.diagnostics["beta"] = beta;
  out.diagnostics["iota"] = iota;
  return out;
}

}  // namespace dporl
