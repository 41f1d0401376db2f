#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dflsq/bench.hpp"
#include "dflsq/interp.hpp"
#include "dflsq/problems.hpp"
#include "dflsq/profiles.hpp"
#include "dflsq/solver.hpp"
#include "dflsq/subproblems.hpp"

namespace py = pybind11;
using namespace dflsq;

PYBIND11_MODULE(_core, m) {
    m.doc() = "derivative-free Gauss-Newton solver for nonlinear least squares";

    py::register_exception<DegenerateGeometry>(m, "DegenerateGeometryError");
    py::register_exception<BudgetExhausted>(m, "BudgetExhaustedError");
    py::register_exception<EvalFailure>(m, "EvalFailureError");
    py::register_exception<ConfigError>(m, "ConfigurationError");

    py::class_<Problem>(m, "Problem")
        .def_readonly("name", &Problem::name)
        .def_readonly("n", &Problem::n)
        .def_readonly("m", &Problem::m)
        .def_readonly("x0", &Problem::x0)
        .def_readonly("lower", &Problem::lower)
        .def_readonly("upper", &Problem::upper)
        .def_readonly("two_f0", &Problem::two_f0)
        .def_readonly("two_fstar", &Problem::two_fstar)
        .def("residual", [](const Problem& p, const Vector& x) { return p.residual(x); })
        .def("__repr__", [](const Problem& p) {
            return "<Problem " + p.name + " n=" + std::to_string(p.n) +
                   " m=" + std::to_string(p.m) + ">";
        });

    py::class_<NoiseSpec>(m, "NoiseSpec")
        .def(py::init([](const std::string& kind, double sigma, std::uint64_t seed) {
                 return NoiseSpec{noise_kind_from_string(kind), sigma, seed};
             }),
             py::arg("kind") = "none", py::arg("sigma") = 0.0, py::arg("seed") = 0)
        .def_property_readonly("kind", [](const NoiseSpec& n) { return to_string(n.kind); })
        .def_readwrite("sigma", &NoiseSpec::sigma)
        .def_readwrite("seed", &NoiseSpec::seed);

    py::class_<EvalBudget>(m, "EvalBudget")
        .def(py::init([](int max_evals) {
                 EvalBudget b;
                 b.max_evals = max_evals;
                 return b;
             }),
             py::arg("max_evals"))
        .def_readwrite("max_evals", &EvalBudget::max_evals)
        .def_readwrite("used", &EvalBudget::used);

    py::class_<SolverConfig>(m, "SolverConfig")
        .def(py::init<>())
        .def_property(
            "mode", [](const SolverConfig& c) { return to_string(c.mode); },
            [](SolverConfig& c, const std::string& s) { c.mode = mode_from_string(s); })
        .def_readwrite("delta0", &SolverConfig::delta0)
        .def_readwrite("rho_end", &SolverConfig::rho_end)
        .def_readwrite("delta_max", &SolverConfig::delta_max)
        .def_readwrite("eta1", &SolverConfig::eta1)
        .def_readwrite("eta2", &SolverConfig::eta2)
        .def_readwrite("eps_c", &SolverConfig::eps_c)
        .def_readwrite("mu", &SolverConfig::mu)
        .def_readwrite("omega_c", &SolverConfig::omega_c)
        .def_readwrite("lambda_poise", &SolverConfig::lambda_poise)
        .def_readwrite("geom_dist_factor", &SolverConfig::geom_dist_factor)
        .def_readwrite("max_evals", &SolverConfig::max_evals);

    py::class_<EvalRecord>(m, "EvalRecord")
        .def_readonly("eval_index", &EvalRecord::eval_index)
        .def_readonly("x", &EvalRecord::x)
        .def_readonly("f_noisy", &EvalRecord::f_noisy)
        .def_readonly("f_true", &EvalRecord::f_true);

    py::class_<SolveResult>(m, "SolveResult")
        .def_readonly("x_final", &SolveResult::x_final)
        .def_readonly("f_final", &SolveResult::f_final)
        .def_readonly("evals_used", &SolveResult::evals_used)
        .def_readonly("iterations", &SolveResult::iterations)
        .def_property_readonly("termination",
                               [](const SolveResult& r) { return to_string(r.termination); })
        .def_readonly("trace", &SolveResult::trace)
        .def("__repr__", [](const SolveResult& r) {
            return "<SolveResult " + to_string(r.termination) +
                   " f=" + std::to_string(r.f_final) + ">";
        });

    m.def("suite_names", &suite_names);
    m.def(
        "make_problem",
        [](const std::string& name, std::optional<int> dim) { return make_problem(name, dim); },
        py::arg("name"), py::arg("dim") = std::nullopt);
    m.def("build_suite", [](const std::vector<std::string>& names) { return build_suite(names); });
    m.def("build_suite", []() { return build_suite(); });
    m.def("objective", &objective, py::arg("rvec"));
    m.def(
        "evaluate",
        [](const Problem& p, const Vector& x, const NoiseSpec& noise, EvalBudget& budget) {
            return evaluate(p, x, noise, budget);
        },
        py::arg("problem"), py::arg("x"), py::arg("noise"), py::arg("budget"));

    m.def(
        "solve",
        [](const Problem& p, const SolverConfig& c, const NoiseSpec& n) { return solve(p, c, n); },
        py::arg("problem"), py::arg("config") = SolverConfig(), py::arg("noise") = NoiseSpec());

    m.def("lin_max_ball_box", &lin_max_ball_box, py::arg("g"), py::arg("delta"), py::arg("xk"),
          py::arg("lower"), py::arg("upper"));

    m.def(
        "evals_to_solve",
        [](const std::vector<double>& f_true, double two_f0, double two_fstar, double tau) {
            const std::int64_t v = evals_to_solve(f_true, two_f0, two_fstar, tau);
            return v == kNeverSolved ? py::object(py::none()) : py::object(py::int_(v));
        },
        py::arg("f_true"), py::arg("two_f0"), py::arg("two_fstar"), py::arg("tau"));

    py::class_<ProfileTable>(m, "ProfileTable")
        .def_property_readonly("kind", [](const ProfileTable& t) { return to_string(t.kind); })
        .def_readonly("solver", &ProfileTable::solver)
        .def_readonly("tau", &ProfileTable::tau)
        .def_readonly("alpha", &ProfileTable::alpha)
        .def_readonly("proportion", &ProfileTable::proportion)
        .def_readonly("runs_averaged", &ProfileTable::runs_averaged);

    m.def(
        "data_profile",
        [](const std::map<std::string, std::int64_t>& evals, const std::map<std::string, int>& dims,
           int budget) { return data_profile(evals, dims, budget); },
        py::arg("evals_needed"), py::arg("dims"), py::arg("budget_gradients"));
    m.def(
        "performance_profile",
        [](const std::map<std::string, std::map<std::string, std::int64_t>>& by_solver) {
            return performance_profile(by_solver);
        },
        py::arg("evals_by_solver"));
    m.def("average_profiles", &average_profiles, py::arg("tables"));

    m.attr("NEVER_SOLVED") = py::none();
}
