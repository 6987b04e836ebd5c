#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "exittime/periodic.hpp"
#include "exittime/resonance.hpp"
#include "exittime/run.hpp"
#include "exittime/simulate.hpp"

namespace py = pybind11;
using namespace exittime;

namespace {

py::array_t<double> slices_array(const PeriodicSolution& sol) {
    const py::ssize_t rows = static_cast<py::ssize_t>(sol.slices.size());
    const py::ssize_t cols = rows ? static_cast<py::ssize_t>(sol.slices.front().size()) : 0;
    py::array_t<double> out({rows, cols});
    auto view = out.mutable_unchecked<2>();
    for (py::ssize_t k = 0; k < rows; ++k)
        for (py::ssize_t i = 0; i < cols; ++i) view(k, i) = sol.slices[k].values[i];
    return out;
}

py::dict report_dict(const SolverReport& r) {
    py::dict d;
    d["cost_history"] = r.cost_history;
    d["contraction_estimates"] = r.contraction_estimates;
    d["step_sizes"] = r.step_sizes;
    d["converged"] = r.converged;
    d["tolerance_used"] = r.tolerance_used;
    d["iterations"] = r.iterations;
    d["period_sweeps"] = r.period_sweeps;
    d["spectral_radius"] = r.spectral_radius;
    d["condition_estimate"] = r.condition_estimate;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Expected exit times of time-periodic SDEs";
    m.attr("__version__") = version;

    py::register_exception<Error>(m, "ExitTimeError", PyExc_RuntimeError);

    py::class_<PeriodicSde1D>(m, "PeriodicSde1D")
        .def_readonly("family", &PeriodicSde1D::family)
        .def_readonly("period", &PeriodicSde1D::period)
        .def("drift", &PeriodicSde1D::b, py::arg("t"), py::arg("x"))
        .def("sigma", &PeriodicSde1D::sigma, py::arg("t"), py::arg("x"));

    m.def("duffing", &duffing, py::arg("amplitude") = 0.12, py::arg("omega") = 1e-3, py::arg("sigma") = 0.285,
          py::arg("period") = py::none());
    m.def("brownian_periodic_drift", &brownian_periodic_drift, py::arg("s_mean") = 0.0, py::arg("s_amp") = 0.0,
          py::arg("omega") = 0.0, py::arg("sigma") = 1.0, py::arg("period") = py::none());
    m.def("periodic_ou", &periodic_ou, py::arg("alpha"), py::arg("s_mean"), py::arg("s_amp"), py::arg("omega"),
          py::arg("sigma"), py::arg("period") = py::none());
    m.def("make_sde", &make_sde, py::arg("family"), py::arg("params") = std::map<std::string, double>{});

    py::class_<ExitDomain>(m, "ExitDomain")
        .def(py::init<double, double>(), py::arg("left"), py::arg("right"))
        .def_property_readonly("lower", &ExitDomain::lower)
        .def_property_readonly("upper", &ExitDomain::upper)
        .def("contains", &ExitDomain::contains);

    py::class_<SpaceTimeGrid>(m, "SpaceTimeGrid")
        .def_readonly("n_x", &SpaceTimeGrid::n_x)
        .def_readonly("n_t", &SpaceTimeGrid::n_t)
        .def_readonly("period", &SpaceTimeGrid::period)
        .def_property_readonly("h", &SpaceTimeGrid::h)
        .def_property_readonly("dt", &SpaceTimeGrid::dt)
        .def("nodes", &SpaceTimeGrid::nodes);

    m.def(
        "make_grid",
        [](const ExitDomain& d, double period, int n_x, int n_t) {
            return make_grid(d, period, n_x, n_t > 0 ? n_t : default_time_steps(period));
        },
        py::arg("domain"), py::arg("period"), py::arg("n_x"), py::arg("n_t") = 0);

    py::class_<SolverOptions>(m, "SolverOptions")
        .def(py::init<>())
        .def_readwrite("tol_F", &SolverOptions::tol_F)
        .def_readwrite("max_iter", &SolverOptions::max_iter);

    m.def(
        "solve_expected_duration",
        [](const PeriodicSde1D& sde, const SpaceTimeGrid& grid, const std::string& method, double tol_F,
           int max_iter) {
            SolverOptions opt;
            opt.tol_F = tol_F;
            opt.max_iter = max_iter;
            SolveResult r = solve_periodic(parse_solver_method(method), Source::constant(1.0), sde, grid, opt);
            return py::make_tuple(slices_array(to_expected_duration(r.solution)), report_dict(r.report));
        },
        py::arg("sde"), py::arg("grid"), py::arg("method") = "banach", py::arg("tol_F") = 1e-5,
        py::arg("max_iter") = 500,
        "Returns (tau, report); tau[k, i] is the expected duration from (t_k, x_i).");

    m.def(
        "survival_duration",
        [](const PeriodicSde1D& sde, const SpaceTimeGrid& grid, double s, int x_index, double tail_tol,
           int max_periods) { return survival_duration(sde, grid, s, x_index, tail_tol, max_periods).duration; },
        py::arg("sde"), py::arg("grid"), py::arg("s"), py::arg("x_index"), py::arg("tail_tol") = 1e-8,
        py::arg("max_periods") = 50);

    py::class_<McConfig>(m, "McConfig")
        .def(py::init<>())
        .def_readwrite("dt", &McConfig::dt)
        .def_readwrite("n_paths", &McConfig::n_paths)
        .def_readwrite("seed", &McConfig::seed)
        .def_readwrite("max_duration", &McConfig::max_duration)
        .def_readwrite("threads", &McConfig::threads);

    py::class_<ExitStatistics>(m, "ExitStatistics")
        .def_readonly("initial_state", &ExitStatistics::initial_state)
        .def_readonly("initial_time", &ExitStatistics::initial_time)
        .def_readonly("mean", &ExitStatistics::mean)
        .def_readonly("std_error", &ExitStatistics::std_error)
        .def_readonly("n_samples", &ExitStatistics::n_samples)
        .def_readonly("n_censored", &ExitStatistics::n_censored);

    m.def(
        "estimate_expected_exit_curve",
        [](const PeriodicSde1D& sde, const ExitDomain& d, double s, const std::vector<double>& xs,
           const McConfig& cfg) {
            py::gil_scoped_release release;
            return estimate_expected_exit_curve(sde, d, s, xs, cfg);
        },
        py::arg("sde"), py::arg("domain"), py::arg("s"), py::arg("initial_states"), py::arg("config"));

    m.def("moment_bounds", &moment_bounds, py::arg("epsilon"), py::arg("period"));

    py::class_<SweepResult>(m, "SweepResult")
        .def_readonly("sigma", &SweepResult::sigma)
        .def_readonly("tau_at_one", &SweepResult::tau_at_one)
        .def_readonly("solver", &SweepResult::solver)
        .def_readonly("converged", &SweepResult::converged)
        .def_readonly("R_star", &SweepResult::R_star)
        .def_readonly("error", &SweepResult::error);

    m.def(
        "sweep_sigma",
        [](const std::vector<double>& sigmas, int n_x, const std::string& method, double omega, int n_t) {
            ResonanceSetup setup;
            setup.n_x = n_x;
            setup.omega = omega;
            setup.n_t = n_t;
            setup.method = parse_solver_method(method);
            return sweep_sigma(sigmas, setup);
        },
        py::arg("sigmas"), py::arg("n_x") = 500, py::arg("method") = "banach", py::arg("omega") = 1e-3,
        py::arg("n_t") = 0);

    m.def(
        "run",
        [](const std::string& config_json, const std::filesystem::path& out_dir) {
            return run(parse_config(config_json), out_dir).summary_json;
        },
        py::arg("config_json"), py::arg("out_dir"), "Runs a JSON configuration; returns the summary as JSON text.");
}
