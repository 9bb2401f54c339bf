#include "dporl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dporl/serialize.hpp"

namespace dporl {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

LinearMDP build_appendix_f_mdp(int H, std::uint64_t seed) {
  require(H >= 1, "build_appendix_f_mdp: H must be >= 1");
  constexpr int S = 2, A = 100, d = 10;
  LinearMDP lin;
  lin.S = S;
  lin.A = A;
  lin.H = H;
  lin.d = d;
  lin.d1 = {0.5, 0.5};
  lin.phi.assign(static_cast<std::size_t>(S) * A * d, 0.0);
  lin.nu.assign(static_cast<std::size_t>(H) * S * d, 0.0);
  lin.theta.assign(static_cast<std::size_t>(H) * d, 0.0);

  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      double* f = lin.phi.data() + (static_cast<std::size_t>(s) * A + a) * d;
      for (int bit = 0; bit < 8; ++bit) f[bit] = (a >> bit) & 1;
      double indicator = ((s == 0) == (a == 0)) ? 1.0 : 0.0;
      f[8] = indicator;
      f[9] = 1.0 - indicator;
    }

  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int h = 0; h < H; ++h) {
    double alpha1 = unif(rng), alpha2 = unif(rng);
    double* nu0 = lin.nu.data() + (static_cast<std::size_t>(h) * S + 0) * d;
    double* nu1 = lin.nu.data() + (static_cast<std::size_t>(h) * S + 1) * d;
    nu0[8] = alpha1;
    nu0[9] = alpha2;
    nu1[8] = 1.0 - alpha1;
    nu1[9] = 1.0 - alpha2;

    double r = unif(rng);
    double* th = lin.theta.data() + static_cast<std::size_t>(h) * d;
    const double eighth = r / 8.0, half_rest = 0.5 - r / 2.0;
    th[0] = eighth;
    th[1] = 0.0;
    th[2] = eighth;
    th[3] = half_rest;
    th[4] = eighth;
    th[5] = 0.0;
    th[6] = eighth;
    th[7] = 0.0;
    th[8] = r / 2.0;
    th[9] = half_rest;
  }
  return lin;
}

Policy behavior_policy_appendix_f(double p, int H, int S, int A) {
  require(p > 0.0 && p < 1.0, "behavior policy: p must be in (0,1)");
  require(A >= 2, "behavior policy: need at least two actions");
  std::vector<double> probs(static_cast<std::size_t>(H) * S * A,
                            (1.0 - p) / (A - 1));
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s)
      probs[(static_cast<std::size_t>(h) * S + s) * A] = p;
  return Policy::stochastic(H, S, A, std::move(probs));
}

TabularMDP random_tabular_mdp(int S, int A, int H, std::uint64_t seed) {
  require(S >= 1 && A >= 1 && H >= 1, "random_tabular_mdp: bad dimensions");
  TabularMDP mdp;
  mdp.S = S;
  mdp.A = A;
  mdp.H = H;
  mdp.P.resize(static_cast<std::size_t>(H) * S * A * S);
  mdp.r.resize(static_cast<std::size_t>(H) * S * A);
  mdp.d1.resize(S);
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  auto dirichlet_row = [&](double* row, int n) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      row[i] = expo(rng);
      sum += row[i];
    }
    for (int i = 0; i < n; ++i) row[i] /= sum;
  };
  dirichlet_row(mdp.d1.data(), S);
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        dirichlet_row(mdp.P.data() + mdp.pidx(h, s, a, 0), S);
        mdp.r[mdp.ridx(h, s, a)] = unif(rng);
      }
  return mdp;
}

Policy eps_greedy_behavior(const TabularMDP& mdp, double eps) {
  require(eps >= 0.0 && eps <= 1.0, "eps_greedy_behavior: eps in [0,1]");
  OptimalSolution sol = solve_optimal(mdp);
  std::vector<double> probs(
      static_cast<std::size_t>(mdp.H) * mdp.S * mdp.A, eps / mdp.A);
  for (int h = 0; h < mdp.H; ++h)
    for (int s = 0; s < mdp.S; ++s)
      probs[(static_cast<std::size_t>(h) * mdp.S + s) * mdp.A +
            sol.pi_star.action(h, s)] += 1.0 - eps;
  return Policy::stochastic(mdp.H, mdp.S, mdp.A, std::move(probs));
}

double xi_diagnostic(const TabularMDP& mdp) {
  OptimalSolution opt = solve_optimal(mdp);
  PolicyEvaluation ev = exact_policy_value(mdp, opt.pi_star);
  double xi = 0.0;
  for (int h = 0; h < mdp.H; ++h)
    for (int s = 0; s < mdp.S; ++s)
      for (int a = 0; a < mdp.A; ++a) {
        double q = ev.Q[(static_cast<std::size_t>(h) * mdp.S + s) * mdp.A + a];
        double mean = 0.0, second = 0.0;
        for (int s2 = 0; s2 < mdp.S; ++s2) {
          double p = mdp.P[mdp.pidx(h, s, a, s2)];
          if (p == 0.0) continue;
          double v = h + 1 < mdp.H
                         ? ev.V[static_cast<std::size_t>(h + 1) * mdp.S + s2]
                         : 0.0;
          mean += p * v;
          second += p * v * v;
        }
        double sd = std::sqrt(std::max(1.0, second - mean * mean));
        for (int s2 = 0; s2 < mdp.S; ++s2) {
          if (mdp.P[mdp.pidx(h, s, a, s2)] == 0.0) continue;
          double v = h + 1 < mdp.H
                         ? ev.V[static_cast<std::size_t>(h + 1) * mdp.S + s2]
                         : 0.0;
          xi = std::max(xi, std::abs(mdp.r[mdp.ridx(h, s, a)] + v - q) / sd);
        }
      }
  return xi;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Seed-stream salts: data streams never depend on the algorithm, noise
// streams do, so all algorithms are paired on identical datasets.
constexpr std::uint64_t kDataSalt = 0xDA7A5EEDULL;
constexpr std::uint64_t kNoiseSalt = 0x2015EEDULL;

struct Task {
  std::string alg;        // vapvi | dp-vapvi | pevi | apvi | dp-apvi
  double rho = kInf;      // inf for non-private
  std::size_t alg_index = 0;
  std::size_t cell_index = 0;
  std::int64_t k = 0;
  int rep = 0;
};

}  // namespace

std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg) {
  require(!cfg.algorithms.empty(), "run_sweep: empty algorithm list");
  require(!cfg.k_grid.empty(), "run_sweep: empty K grid");
  require(cfg.seeds >= 1, "run_sweep: seeds must be >= 1");

  // Environment, evaluation model and behavior policy.
  LinearMDP linear;
  TabularMDP tab;
  bool is_linear = false;
  std::string env_name;
  switch (cfg.env) {
    case ExperimentConfig::Env::appendix_f:
      linear = build_appendix_f_mdp(cfg.H, cfg.env_seed);
      tab = tabularize(linear);
      is_linear = true;
      env_name = "appendix_f";
      break;
    case ExperimentConfig::Env::random_tabular:
      tab = random_tabular_mdp(cfg.S, cfg.A, cfg.H, cfg.env_seed);
      env_name = "random_tabular";
      break;
    case ExperimentConfig::Env::file: {
      LoadedEnv env = load_env_file(cfg.env_path);
      if (env.kind == EnvKind::linear) {
        linear = env.linear;
        tab = tabularize(linear);
        is_linear = true;
      } else {
        tab = env.tabular;
      }
      env_name = cfg.env_path;
      break;
    }
  }
  Policy mu = is_linear
                  ? behavior_policy_appendix_f(cfg.behavior_p, tab.H, tab.S, tab.A)
                  : eps_greedy_behavior(tab, cfg.behavior_eps);
  OptimalSolution opt = solve_optimal(tab);

  // Task list: one row per (algorithm series, K, repetition).
  std::vector<Task> tasks;
  std::size_t alg_index = 0;
  for (const std::string& alg : cfg.algorithms) {
    bool priv = alg == "dp-vapvi" || alg == "dp-apvi";
    std::vector<double> rhos =
        priv ? cfg.rho_grid : std::vector<double>{kInf};
    require(!rhos.empty(), "run_sweep: empty rho grid for a private algorithm");
    for (double rho : rhos) {
      for (std::size_t ci = 0; ci < cfg.k_grid.size(); ++ci)
        for (int rep = 0; rep < cfg.seeds; ++rep)
          tasks.push_back({alg, rho, alg_index, ci, cfg.k_grid[ci], rep});
      ++alg_index;
    }
  }

  std::vector<ResultRow> rows(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& t = tasks[i];
      ResultRow row;
      row.alg = t.alg;
      row.env = env_name;
      row.H = tab.H;
      row.K = t.k;
      row.rho = t.rho;
      std::uint64_t data_seed = mix_seed(
          {cfg.master_seed, kDataSalt, t.cell_index, static_cast<std::uint64_t>(t.rep)});
      std::uint64_t noise_seed =
          mix_seed({cfg.master_seed, kNoiseSalt, t.alg_index, t.cell_index,
                    static_cast<std::uint64_t>(t.rep)});
      row.seed = static_cast<std::uint64_t>(t.rep);
      auto start = std::chrono::steady_clock::now();
      try {
        LearnedPolicy learned;
        if (t.alg == "vapvi" || t.alg == "dp-vapvi" || t.alg == "pevi") {
          require(is_linear, "run_sweep: linear algorithm on tabular env");
          VapviConfig vc = cfg.vapvi;
          vc.rho = t.alg == "dp-vapvi" ? t.rho : 0.0;
          Dataset data, data_prime;
          if (vc.split_data && t.alg != "pevi") {
            Dataset both = sample_dataset(tab, mu, 2 * t.k, data_seed);
            data.H = data_prime.H = both.H;
            data.count = data_prime.count = t.k;
            std::size_t half = static_cast<std::size_t>(t.k) * both.H;
            data.s.assign(both.s.begin(), both.s.begin() + half);
            data.a.assign(both.a.begin(), both.a.begin() + half);
            data.s_next.assign(both.s_next.begin(), both.s_next.begin() + half);
            data.r.assign(both.r.begin(), both.r.begin() + half);
            data_prime.s.assign(both.s.begin() + half, both.s.end());
            data_prime.a.assign(both.a.begin() + half, both.a.end());
            data_prime.s_next.assign(both.s_next.begin() + half, both.s_next.end());
            data_prime.r.assign(both.r.begin() + half, both.r.end());
          } else {
            data = sample_dataset(tab, mu, t.k, data_seed);
            data_prime = data;
          }
          if (t.alg == "pevi")
            learned = pevi(data, linear, vc);
          else if (t.alg == "vapvi")
            learned = vapvi(data, data_prime, linear, vc);
          else
            learned = dp_vapvi(data, data_prime, linear, vc, noise_seed);
        } else if (t.alg == "apvi" || t.alg == "dp-apvi") {
          ApviConfig ac = cfg.apvi;
          if (t.alg != "dp-apvi")
            ac.budget = privacy::PrivacyBudget::zcdp(0.0);
          else if (cfg.pure_dp)
            ac.budget = privacy::PrivacyBudget::pure_dp(t.rho);
          else
            ac.budget = privacy::PrivacyBudget::zcdp(t.rho);
          Dataset data = sample_dataset(tab, mu, t.k, data_seed);
          learned = dp_apvi(data, tab.S, tab.A, tab.H, tab.r, ac, noise_seed);
        } else {
          throw std::invalid_argument("run_sweep: unknown algorithm " + t.alg);
        }
        row.subopt = opt.v_star - exact_policy_value(tab, learned.policy).v;
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      auto end = std::chrono::steady_clock::now();
      row.runtime_ms =
          std::chrono::duration<double, std::milli>(end - start).count();
      rows[i] = std::move(row);
    }
  };

  int jobs = std::max(1, cfg.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return rows;
}

namespace {

std::string fmt6(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

std::string to_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  os << "alg,env,H,K,rho,seed,subopt,runtime_ms\n";
  for (const ResultRow& r : rows) {
    if (!r.error.empty()) {
      os << r.alg << ',' << r.env << ',' << r.H << ',' << r.K << ','
         << fmt6(r.rho) << ',' << r.seed << ",error:" << r.error << ",\n";
      continue;
    }
    os << r.alg << ',' << r.env << ',' << r.H << ',' << r.K << ','
       << fmt6(r.rho) << ',' << r.seed << ',' << fmt6(r.subopt) << ','
       << fmt6(r.runtime_ms) << '\n';
  }
  return os.str();
}

std::vector<ResultRow> parse_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::getline(is, line);
  if (line != "alg,env,H,K,rho,seed,subopt,runtime_ms")
    throw std::runtime_error("csv: unexpected header: " + line);
  std::vector<ResultRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (true) {
      std::size_t comma = line.find(',', pos);
      parts.push_back(line.substr(pos, comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (parts.size() != 8) throw std::runtime_error("csv: malformed row: " + line);
    ResultRow r;
    r.alg = parts[0];
    r.env = parts[1];
    r.H = std::stoi(parts[2]);
    r.K = std::stoll(parts[3]);
    r.rho = parts[4] == "inf" ? kInf : std::stod(parts[4]);
    r.seed = std::stoull(parts[5]);
    if (parts[6].rfind("error:", 0) == 0) {
      r.error = parts[6].substr(6);
    } else {
      r.subopt = std::stod(parts[6]);
      r.runtime_ms = std::stod(parts[7]);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace {

std::string series_label(const ResultRow& r) {
  if (std::isinf(r.rho)) return r.alg;
  return r.alg + " rho=" + fmt6(r.rho);
}

}  // namespace

std::string render_svg(const std::vector<ResultRow>& rows) {
  // Mean suboptimality per (series, K).
  std::map<std::string, std::map<std::int64_t, std::pair<double, int>>> agg;
  for (const ResultRow& r : rows) {
    if (!r.error.empty()) continue;
    auto& cell = agg[series_label(r)][r.K];
    cell.first += r.subopt;
    cell.second += 1;
  }
  if (agg.empty()) throw std::runtime_error("render_svg: no successful rows");

  const double width = 760, height = 520;
  const double ml = 70, mr = 180, mt = 30, mb = 55;
  const double pw = width - ml - mr, ph = height - mt - mb;

  double kmin = kInf, kmax = 0, ymax = 0;
  for (const auto& [label, pts] : agg)
    for (const auto& [k, cell] : pts) {
      kmin = std::min(kmin, static_cast<double>(k));
      kmax = std::max(kmax, static_cast<double>(k));
      ymax = std::max(ymax, cell.first / cell.second);
    }
  if (ymax <= 0) ymax = 1;
  ymax *= 1.05;
  double lmin = std::log10(std::max(1.0, kmin));
  double lmax = std::log10(std::max(kmin + 1.0, kmax));
  auto X = [&](double k) {
    return ml + (std::log10(k) - lmin) / (lmax - lmin) * pw;
  };
  auto Y = [&](double v) { return mt + ph - v / ymax * ph; };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // axes
  os << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw
     << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
     << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 12
     << "\" text-anchor=\"middle\">episodes K</text>\n";
  os << "<text x=\"18\" y=\"" << mt + ph / 2
     << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << mt + ph / 2
     << ")\">mean suboptimality</text>\n";
  // x ticks at the observed K values, y ticks on a 5-way split
  std::vector<std::int64_t> kticks;
  for (const auto& [k, cell] : agg.begin()->second) kticks.push_back(k);
  for (std::int64_t k : kticks) {
    double x = X(static_cast<double>(k));
    os << "<line x1=\"" << x << "\" y1=\"" << mt + ph << "\" x2=\"" << x
       << "\" y2=\"" << mt + ph + 4 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << x << "\" y=\"" << mt + ph + 18
       << "\" text-anchor=\"middle\">" << k << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    double v = ymax * i / 5.0;
    os << "<line x1=\"" << ml - 4 << "\" y1=\"" << Y(v) << "\" x2=\"" << ml
       << "\" y2=\"" << Y(v) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << ml - 8 << "\" y=\"" << Y(v) + 4
       << "\" text-anchor=\"end\">" << fmt6(v) << "</text>\n";
  }
  // series
  int color = 0;
  for (const auto& [label, pts] : agg) {
    const char* c = palette[color % 8];
    os << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [k, cell] : pts)
      os << X(static_cast<double>(k)) << ',' << Y(cell.first / cell.second) << ' ';
    os << "\"/>\n";
    double ly = mt + 16 + 18 * color;
    os << "<line x1=\"" << ml + pw + 12 << "\" y1=\"" << ly - 4 << "\" x2=\""
       << ml + pw + 34 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << c
       << "\" stroke-width=\"1.5\"/>\n";
    os << "<text x=\"" << ml + pw + 40 << "\" y=\"" << ly << "\">" << label
       << "</text>\n";
    ++color;
  }
  os << "</svg>\n";
  return os.str();
}

void emit_outputs(const std::vector<ResultRow>& rows, const std::string& csv_path,
                  const std::string& svg_path) {
  if (rows.empty()) throw std::invalid_argument("emit_outputs: no rows");
  {
    std::ofstream os(csv_path);
    if (!os) throw std::runtime_error("cannot open for writing: " + csv_path);
    os << to_csv(rows);
  }
  if (!svg_path.empty()) {
    std::ofstream os(svg_path);
    if (!os) throw std::runtime_error("cannot open for writing: " + svg_path);
    os << render_svg(rows);
  }
}

}  // namespace dporl
