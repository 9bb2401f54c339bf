#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dporl/count_release.hpp"
#include "dporl/dp_apvi.hpp"
#include "dporl/dp_vapvi.hpp"
#include "dporl/harness.hpp"
#include "dporl/mdp_core.hpp"
#include "dporl/privacy.hpp"

namespace py = pybind11;
using namespace dporl;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Differentially private offline RL: pessimistic value iteration "
            "on tabular and linear MDPs with zCDP/pure-DP accounting.";

  py::class_<Policy>(m, "Policy")
      .def_static("deterministic", &Policy::deterministic, py::arg("H"),
                  py::arg("S"), py::arg("A"), py::arg("actions"))
      .def_static("stochastic", &Policy::stochastic, py::arg("H"), py::arg("S"),
                  py::arg("A"), py::arg("probs"))
      .def_static("uniform", &Policy::uniform, py::arg("H"), py::arg("S"),
                  py::arg("A"))
      .def_property_readonly("S", &Policy::S)
      .def_property_readonly("A", &Policy::A)
      .def_property_readonly("H", &Policy::H)
      .def("is_deterministic", &Policy::is_deterministic)
      .def("prob", &Policy::prob, py::arg("h"), py::arg("s"), py::arg("a"))
      .def("action", &Policy::action, py::arg("h"), py::arg("s"))
      .def("__eq__", [](const Policy& a, const Policy& b) { return a == b; });

  py::class_<TabularMDP>(m, "TabularMDP")
      .def(py::init<>())
      .def_readwrite("S", &TabularMDP::S)
      .def_readwrite("A", &TabularMDP::A)
      .def_readwrite("H", &TabularMDP::H)
      .def_readwrite("P", &TabularMDP::P)
      .def_readwrite("r", &TabularMDP::r)
      .def_readwrite("d1", &TabularMDP::d1)
      .def("validate", &TabularMDP::validate);

  py::class_<LinearMDP>(m, "LinearMDP")
      .def(py::init<>())
      .def_readwrite("S", &LinearMDP::S)
      .def_readwrite("A", &LinearMDP::A)
      .def_readwrite("H", &LinearMDP::H)
      .def_readwrite("d", &LinearMDP::d)
      .def_readwrite("phi", &LinearMDP::phi)
      .def_readwrite("nu", &LinearMDP::nu)
      .def_readwrite("theta", &LinearMDP::theta)
      .def_readwrite("d1", &LinearMDP::d1)
      .def("transition", &LinearMDP::transition)
      .def("reward", &LinearMDP::reward);

  py::class_<Dataset>(m, "Dataset")
      .def(py::init<>())
      .def_readwrite("H", &Dataset::H)
      .def_readwrite("count", &Dataset::count)
      .def_readwrite("s", &Dataset::s)
      .def_readwrite("a", &Dataset::a)
      .def_readwrite("s_next", &Dataset::s_next)
      .def_readwrite("r", &Dataset::r);

  py::class_<OccupancyTable>(m, "OccupancyTable")
      .def_readonly("d", &OccupancyTable::d)
      .def("at", &OccupancyTable::at)
      .def("min_positive", &OccupancyTable::min_positive)
      .def("trackable", &OccupancyTable::trackable);

  py::class_<LearnedPolicy>(m, "LearnedPolicy")
      .def_readonly("policy", &LearnedPolicy::policy)
      .def_readonly("q_bar", &LearnedPolicy::q_bar)
      .def_readonly("v_tilde", &LearnedPolicy::v_tilde)
      .def_readonly("bonus", &LearnedPolicy::bonus)
      .def_readonly("ledger_text", &LearnedPolicy::ledger_text)
      .def_readonly("diagnostics", &LearnedPolicy::diagnostics);

  m.def("validate_linear_mdp", [](const LinearMDP& lin) {
    std::vector<std::string> out;
    for (const auto& v : validate_linear_mdp(lin).violations)
      out.push_back(v.str());
    return out;
  });
  m.def("tabularize", &tabularize);
  m.def(
      "exact_policy_value",
      [](const TabularMDP& mdp, const Policy& pi) {
        PolicyEvaluation ev = exact_policy_value(mdp, pi);
        return py::make_tuple(ev.v, ev.V, ev.Q);
      },
      py::arg("mdp"), py::arg("pi"));
  m.def(
      "solve_optimal",
      [](const TabularMDP& mdp) {
        OptimalSolution sol = solve_optimal(mdp);
        return py::make_tuple(sol.pi_star, sol.v_star, sol.V_star);
      },
      py::arg("mdp"));
  m.def("occupancy", &occupancy, py::arg("mdp"), py::arg("pi"));
  m.def("sample_dataset", &sample_dataset, py::arg("mdp"), py::arg("mu"),
        py::arg("count"), py::arg("seed"));
  m.def("monte_carlo_value", &monte_carlo_value, py::arg("mdp"), py::arg("pi"),
        py::arg("rollouts"), py::arg("seed"));

  m.def("build_appendix_f_mdp", &build_appendix_f_mdp, py::arg("H"),
        py::arg("seed"));
  m.def("behavior_policy_appendix_f", &behavior_policy_appendix_f, py::arg("p"),
        py::arg("H"), py::arg("S"), py::arg("A"));
  m.def("random_tabular_mdp", &random_tabular_mdp, py::arg("S"), py::arg("A"),
        py::arg("H"), py::arg("seed"));
  m.def("eps_greedy_behavior", &eps_greedy_behavior, py::arg("mdp"),
        py::arg("eps"));
  m.def("feature_coverage_kappa", &feature_coverage_kappa, py::arg("env"),
        py::arg("mu"));
  m.def("xi_diagnostic", &xi_diagnostic, py::arg("mdp"));

  m.def(
      "gaussian_mechanism",
      [](std::vector<double> x, double delta2, double rho, std::uint64_t seed) {
        return privacy::gaussian_mechanism(x, delta2, rho, seed);
      },
      py::arg("x"), py::arg("delta2"), py::arg("rho"), py::arg("seed"));
  m.def(
      "laplace_mechanism",
      [](std::vector<double> x, double delta1, double eps, std::uint64_t seed) {
        return privacy::laplace_mechanism(x, delta1, eps, seed);
      },
      py::arg("x"), py::arg("delta1"), py::arg("eps"), py::arg("seed"));
  m.def("compose_zcdp", [](std::vector<double> budgets) {
    return privacy::compose_zcdp(budgets);
  });
  m.def("zcdp_to_approx_dp", &privacy::zcdp_to_approx_dp, py::arg("rho"),
        py::arg("delta"));
  m.def(
      "symmetric_noise_matrix",
      [](int d, double rho0, double shift, std::uint64_t seed) {
        return privacy::symmetric_noise_matrix({d, rho0, shift}, seed);
      },
      py::arg("d"), py::arg("rho0"), py::arg("shift"), py::arg("seed"));

  m.def(
      "project_row",
      [](std::vector<double> noisy_children, double parent_target,
         double half_band) {
        ProjectedRow row = project_row(noisy_children, parent_target, half_band);
        return py::make_tuple(row.x, row.parent, row.objective);
      },
      py::arg("noisy_children"), py::arg("parent_target"), py::arg("half_band"),
      "Consistency projection of one noisy count row; returns (children, "
      "parent, objective).");

  py::class_<ApviConfig>(m, "ApviConfig")
      .def(py::init<>())
      .def_readwrite("c1", &ApviConfig::c1)
      .def_readwrite("c2", &ApviConfig::c2)
      .def_readwrite("delta", &ApviConfig::delta)
      .def_property(
          "c_unvisited", [](const ApviConfig& c) { return c.c_unvisited; },
          [](ApviConfig& c, std::optional<double> v) { c.c_unvisited = v; })
      .def("set_zcdp",
           [](ApviConfig& c, double rho) {
             c.budget = privacy::PrivacyBudget::zcdp(rho);
           })
      .def("set_pure_dp", [](ApviConfig& c, double eps) {
        c.budget = privacy::PrivacyBudget::pure_dp(eps);
      });

  py::class_<VapviConfig> vap(m, "VapviConfig");
  py::enum_<VapviConfig::PessimismMode>(vap, "PessimismMode")
      .value("theory", VapviConfig::PessimismMode::theory)
      .value("empirical", VapviConfig::PessimismMode::empirical);
  vap.def(py::init<>())
      .def_readwrite("rho", &VapviConfig::rho)
      .def_readwrite("delta", &VapviConfig::delta)
      .def_readwrite("lambda_", &VapviConfig::lambda)
      .def_readwrite("c_bonus", &VapviConfig::c_bonus)
      .def_readwrite("c1", &VapviConfig::c1)
      .def_readwrite("c2", &VapviConfig::c2)
      .def_readwrite("c_d", &VapviConfig::c_d)
      .def_readwrite("split_data", &VapviConfig::split_data)
      .def_readwrite("kappa", &VapviConfig::kappa)
      .def_readwrite("pessimism_mode", &VapviConfig::pessimism_mode);

  m.def(
      "dp_apvi",
      [](const Dataset& data, int S, int A, int H, std::vector<double> reward,
         const ApviConfig& cfg, std::uint64_t seed) {
        return dp_apvi(data, S, A, H, reward, cfg, seed);
      },
      py::arg("data"), py::arg("S"), py::arg("A"), py::arg("H"),
      py::arg("reward"), py::arg("cfg"), py::arg("seed"));
  m.def(
      "apvi",
      [](const Dataset& data, int S, int A, int H, std::vector<double> reward,
         ApviConfig cfg) { return apvi(data, S, A, H, reward, cfg); },
      py::arg("data"), py::arg("S"), py::arg("A"), py::arg("H"),
      py::arg("reward"), py::arg("cfg") = ApviConfig{});
  m.def("dp_vapvi", &dp_vapvi, py::arg("data"), py::arg("data_prime"),
        py::arg("env"), py::arg("cfg"), py::arg("seed"));
  m.def("vapvi", &vapvi, py::arg("data"), py::arg("data_prime"), py::arg("env"),
        py::arg("cfg") = VapviConfig{});
  m.def("pevi", &pevi, py::arg("data"), py::arg("env"), py::arg("cfg"));
}
