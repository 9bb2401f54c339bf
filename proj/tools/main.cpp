// Command-line front end: environment generation, single runs, grid sweeps
// and plotting.
#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dporl/harness.hpp"
#include "dporl/serialize.hpp"

namespace {

using namespace dporl;

struct EnvFlags {
  std::string kind = "appendix-f";
  std::string path;
  int H = 20, S = 3, A = 2;
  std::uint64_t env_seed = 1;
};

void add_env_flags(CLI::App* cmd, EnvFlags& env) {
  cmd->add_option("--env", env.kind,
                  "environment: appendix-f, random-tabular, or file")
      ->capture_default_str();
  cmd->add_option("--env-file", env.path, "environment file (with --env file)");
  cmd->add_option("--horizon", env.H, "horizon H")->capture_default_str();
  cmd->add_option("--states", env.S, "states (random-tabular)")
      ->capture_default_str();
  cmd->add_option("--actions", env.A, "actions (random-tabular)")
      ->capture_default_str();
  cmd->add_option("--env-seed", env.env_seed, "environment construction seed")
      ->capture_default_str();
}

void apply_env(const EnvFlags& env, ExperimentConfig& cfg) {
  if (env.kind == "appendix-f")
    cfg.env = ExperimentConfig::Env::appendix_f;
  else if (env.kind == "random-tabular")
    cfg.env = ExperimentConfig::Env::random_tabular;
  else if (env.kind == "file")
    cfg.env = ExperimentConfig::Env::file;
  else
    throw CLI::ValidationError("--env must be appendix-f, random-tabular or file");
  cfg.env_path = env.path;
  cfg.H = env.H;
  cfg.S = env.S;
  cfg.A = env.A;
  cfg.env_seed = env.env_seed;
}

void add_learner_flags(CLI::App* cmd, ExperimentConfig& cfg,
                       std::string& pessimism) {
  cmd->add_option("--delta", cfg.vapvi.delta, "failure probability")
      ->capture_default_str();
  cmd->add_option("--lambda", cfg.vapvi.lambda, "ridge parameter")
      ->capture_default_str();
  cmd->add_option("--c-bonus", cfg.vapvi.c_bonus, "elliptical bonus constant C")
      ->capture_default_str();
  cmd->add_option("--c1", cfg.vapvi.c1, "constant c1 inside the shift bound E")
      ->capture_default_str();
  cmd->add_option("--c2", cfg.vapvi.c2, "constant c2 inside the shift bound E")
      ->capture_default_str();
  cmd->add_option("--c-d", cfg.vapvi.c_d, "multiplier on the additive D term")
      ->capture_default_str();
  cmd->add_flag("--split-data", cfg.vapvi.split_data,
                "use disjoint halves for the variance and regression stages");
  cmd->add_option("--pessimism", pessimism, "pessimism mode: empirical|theory")
      ->capture_default_str();
  cmd->add_option("--kappa", cfg.vapvi.kappa,
                  "feature coverage constant (theory mode)")
      ->capture_default_str();
  cmd->add_option("--apvi-c1", cfg.apvi.c1, "tabular bonus constant C1")
      ->capture_default_str();
  cmd->add_option("--apvi-c2", cfg.apvi.c2, "tabular bonus constant C2")
      ->capture_default_str();
  cmd->add_option_function<double>(
      "--apvi-c",
      [&cfg](const double& v) { cfg.apvi.c_unvisited = v; },
      "unvisited-pair penalty multiplier (default H+1)");
  cmd->add_option("--apvi-delta", cfg.apvi.delta, "tabular failure probability")
      ->capture_default_str();
  cmd->add_flag("--pure-dp", cfg.pure_dp,
                "release counts under Laplace/pure DP; the budget grid is "
                "then read as epsilon (dp-apvi only)");
  cmd->add_option("--behavior-p", cfg.behavior_p,
                  "behavior policy weight on action 0 (linear envs)")
      ->capture_default_str();
  cmd->add_option("--behavior-eps", cfg.behavior_eps,
                  "e-greedy exploration rate (tabular envs)")
      ->capture_default_str();
}

void finish_learner_flags(const std::string& pessimism, ExperimentConfig& cfg) {
  if (pessimism == "empirical")
    cfg.vapvi.pessimism_mode = VapviConfig::PessimismMode::empirical;
  else if (pessimism == "theory")
    cfg.vapvi.pessimism_mode = VapviConfig::PessimismMode::theory;
  else
    throw CLI::ValidationError("--pessimism must be empirical or theory");
  if (cfg.vapvi.pessimism_mode == VapviConfig::PessimismMode::theory &&
      cfg.vapvi.lambda >= cfg.vapvi.kappa)
    std::cerr << "warning: lambda >= kappa; the theory-mode guarantee assumes "
                 "0 < lambda < kappa\n";
}

int cmd_gen_env(const EnvFlags& env, const std::string& out) {
  if (env.kind == "appendix-f") {
    save_linear_mdp(out, build_appendix_f_mdp(env.H, env.env_seed));
  } else if (env.kind == "random-tabular") {
    save_tabular_mdp(out, random_tabular_mdp(env.S, env.A, env.H, env.env_seed));
  } else {
    std::cerr << "gen-env requires --env appendix-f or random-tabular\n";
    return 1;
  }
  std::cout << "wrote " << out << "\n";
  return 0;
}

// Builds the same environment/behavior pair the sweep would use.
struct RunEnv {
  LinearMDP linear;
  TabularMDP tab;
  bool is_linear = false;
  Policy mu;
};

RunEnv materialize_env(const ExperimentConfig& cfg) {
  RunEnv re;
  if (cfg.env == ExperimentConfig::Env::appendix_f) {
    re.linear = build_appendix_f_mdp(cfg.H, cfg.env_seed);
    re.tab = tabularize(re.linear);
    re.is_linear = true;
  } else if (cfg.env == ExperimentConfig::Env::file) {
    LoadedEnv env = load_env_file(cfg.env_path);
    re.is_linear = env.kind == EnvKind::linear;
    if (re.is_linear) {
      re.linear = env.linear;
      re.tab = tabularize(re.linear);
    } else {
      re.tab = env.tabular;
    }
  } else {
    re.tab = random_tabular_mdp(cfg.S, cfg.A, cfg.H, cfg.env_seed);
  }
  re.mu = re.is_linear
              ? behavior_policy_appendix_f(cfg.behavior_p, re.tab.H, re.tab.S,
                                           re.tab.A)
              : eps_greedy_behavior(re.tab, cfg.behavior_eps);
  return re;
}

int cmd_run(ExperimentConfig cfg, const std::string& alg, std::int64_t k,
            double rho, const std::string& diag_path) {
  cfg.algorithms = {alg};
  cfg.k_grid = {k};
  cfg.rho_grid = {rho};
  std::vector<ResultRow> rows = run_sweep(cfg);
  std::cout << to_csv(rows);
  bool failed = false;
  for (const ResultRow& r : rows)
    if (!r.error.empty()) {
      std::cerr << "error: " << r.error << "\n";
      failed = true;
    }

  if (!diag_path.empty() && !failed) {
    // Repeat the first repetition to capture learner diagnostics.
    std::ofstream os(diag_path);
    if (!os) {
      std::cerr << "cannot open " << diag_path << "\n";
      return 1;
    }
    RunEnv re = materialize_env(cfg);
    Dataset data = sample_dataset(
        re.tab, re.mu, k, mix_seed({cfg.master_seed, 0xDA7A5EEDULL, 0, 0}));
    LearnedPolicy lp;
    if (alg == "vapvi" || alg == "dp-vapvi" || alg == "pevi") {
      VapviConfig vc = cfg.vapvi;
      vc.rho = alg == "dp-vapvi" ? rho : 0.0;
      lp = alg == "pevi"
               ? pevi(data, re.linear, vc)
               : dp_vapvi(data, data, re.linear, vc, mix_seed({cfg.master_seed, 1}));
      os << "kappa_exact " << feature_coverage_kappa(re.linear, re.mu) << '\n';
    } else {
      ApviConfig ac = cfg.apvi;
      if (alg != "dp-apvi")
        ac.budget = privacy::PrivacyBudget::zcdp(0.0);
      else if (cfg.pure_dp)
        ac.budget = privacy::PrivacyBudget::pure_dp(rho);
      else
        ac.budget = privacy::PrivacyBudget::zcdp(rho);
      lp = dp_apvi(data, re.tab.S, re.tab.A, re.tab.H, re.tab.r, ac,
                   mix_seed({cfg.master_seed, 1}));
    }
    os << "alg " << alg << '\n';
    for (const auto& [key, value] : lp.diagnostics)
      os << key << ' ' << value << '\n';
    os << "dbar_m " << occupancy(re.tab, re.mu).min_positive() << '\n';
    os << "xi_star " << xi_diagnostic(re.tab) << '\n';
    os << "# release ledger\n" << lp.ledger_text;
    std::cout << "diagnostics written to " << diag_path << "\n";
  }
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"differentially private offline RL experiments"};
  app.require_subcommand(1);
  // Options may come from a config file; subcommand options live in a
  // section named for the subcommand, e.g. [sweep].
  app.set_config("--config", "", "read options from a config file");

  EnvFlags gen_env;
  std::string gen_out = "env.txt";
  CLI::App* gen = app.add_subcommand("gen-env", "write an environment file");
  add_env_flags(gen, gen_env);
  gen->add_option("--out,-o", gen_out, "output path")->capture_default_str();

  ExperimentConfig run_cfg;
  EnvFlags run_env;
  std::string run_alg = "vapvi", run_pessimism = "empirical", run_diag;
  std::int64_t run_k = 100;
  double run_rho = 1.0;
  CLI::App* run = app.add_subcommand("run", "run one (algorithm, K, rho) cell");
  add_env_flags(run, run_env);
  run->add_option("--alg", run_alg, "algorithm: vapvi|dp-vapvi|pevi|apvi|dp-apvi")
      ->capture_default_str();
  run->add_option("--episodes,-K,-n", run_k, "trajectories K (or n)")
      ->capture_default_str();
  run->add_option("--rho", run_rho, "zCDP budget for dp-* algorithms")
      ->capture_default_str();
  run->add_option("--seed", run_cfg.master_seed, "master seed")
      ->capture_default_str();
  run->add_option("--seeds", run_cfg.seeds, "repetitions")->capture_default_str();
  run->add_option("--jobs,-j", run_cfg.jobs, "worker threads")
      ->capture_default_str();
  run->add_option("--diagnostics", run_diag, "write learner diagnostics here");
  add_learner_flags(run, run_cfg, run_pessimism);

  ExperimentConfig sweep_cfg;
  EnvFlags sweep_env;
  sweep_env.H = 20;
  sweep_env.kind = "appendix-f";
  std::string sweep_pessimism = "empirical";
  std::string sweep_out = "results.csv", sweep_svg;
  std::vector<std::string> sweep_algs{"vapvi", "dp-vapvi", "pevi"};
  CLI::App* sweep = app.add_subcommand("sweep", "run the full grid to CSV/SVG");
  add_env_flags(sweep, sweep_env);
  sweep->add_option("--algs", sweep_algs, "algorithms to run")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--k-grid", sweep_cfg.k_grid, "episode grid")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--rho-grid", sweep_cfg.rho_grid, "privacy budget grid")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--seeds", sweep_cfg.seeds, "repetitions per cell")
      ->capture_default_str();
  sweep->add_option("--seed", sweep_cfg.master_seed, "master seed")
      ->capture_default_str();
  sweep->add_option("--jobs,-j", sweep_cfg.jobs, "worker threads")
      ->capture_default_str();
  sweep->add_option("--out,-o", sweep_out, "CSV output path")
      ->capture_default_str();
  sweep->add_option("--svg", sweep_svg, "also render an SVG plot here");
  add_learner_flags(sweep, sweep_cfg, sweep_pessimism);

  std::string plot_in, plot_out = "plot.svg";
  CLI::App* plot = app.add_subcommand("plot", "render an SVG from a results CSV");
  plot->add_option("--in,-i", plot_in, "input CSV")->required();
  plot->add_option("--out,-o", plot_out, "output SVG")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_env(gen_env, gen_out);
    if (run->parsed()) {
      apply_env(run_env, run_cfg);
      finish_learner_flags(run_pessimism, run_cfg);
      return cmd_run(run_cfg, run_alg, run_k, run_rho, run_diag);
    }
    if (sweep->parsed()) {
      apply_env(sweep_env, sweep_cfg);
      finish_learner_flags(sweep_pessimism, sweep_cfg);
      sweep_cfg.algorithms = sweep_algs;
      std::vector<ResultRow> rows = run_sweep(sweep_cfg);
      emit_outputs(rows, sweep_out, sweep_svg);
      int errors = 0;
      for (const ResultRow& r : rows) errors += r.error.empty() ? 0 : 1;
      std::cout << "wrote " << rows.size() << " rows to " << sweep_out;
      if (!sweep_svg.empty()) std::cout << " and plot to " << sweep_svg;
      std::cout << "\n";
      if (errors) std::cerr << errors << " cells failed; see error rows\n";
      return errors ? 1 : 0;
    }
    if (plot->parsed()) {
      std::ifstream is(plot_in);
      if (!is) {
        std::cerr << "cannot open " << plot_in << "\n";
        return 1;
      }
      std::stringstream buf;
      buf << is.rdbuf();
      std::vector<ResultRow> rows = parse_csv(buf.str());
      std::ofstream os(plot_out);
      if (!os) {
        std::cerr << "cannot open " << plot_out << "\n";
        return 1;
      }
      os << render_svg(rows);
      std::cout << "wrote " << plot_out << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
