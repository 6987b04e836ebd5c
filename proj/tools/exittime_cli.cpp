#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "exittime/error.hpp"
#include "exittime/run.hpp"

using namespace exittime;

namespace {

struct Flags {
    std::string config_path;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;

    std::optional<std::string> family;
    std::vector<std::string> params;
    std::optional<std::string> left, right;
    std::optional<double> s;

    std::optional<int> points;
    std::optional<int> n_paths;
    std::optional<double> dt;
    std::optional<double> max_duration;

    std::optional<int> n_x, n_t;
    std::optional<std::string> method, advection;
    std::optional<double> tol;
    std::optional<int> max_iter;

    std::vector<double> at;
    std::optional<double> tail_tol;

    std::vector<double> sweep;
    std::vector<double> bracket;
    std::optional<double> tol_sigma;
    std::optional<double> target;
    bool no_find = false;
};

double parse_end(const std::string& text) {
    if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size())
        throw Error(ErrorCode::InvalidConfig, "cli.flags", "bad domain end '" + text + "'");
    return v;
}

void add_problem_flags(CLI::App* app, Flags& f) {
    app->add_option("--family", f.family, "SDE family: duffing, periodic_ou, brownian_periodic_drift, polynomial");
    app->add_option("--param", f.params, "SDE parameter as key=value (repeatable)");
    app->add_option("--left", f.left, "left domain end (number or -inf)");
    app->add_option("--right", f.right, "right domain end (number or inf)");
    app->add_option("--s", f.s, "initial time");
}

void add_mc_flags(CLI::App* app, Flags& f) {
    app->add_option("--points", f.points, "number of evenly spaced initial states");
    app->add_option("--n-paths", f.n_paths, "sample paths per initial state");
    app->add_option("--dt", f.dt, "Euler-Maruyama step");
    app->add_option("--max-duration", f.max_duration, "censoring horizon in periods");
}

void add_pde_flags(CLI::App* app, Flags& f) {
    app->add_option("--n-x", f.n_x, "interior space nodes");
    app->add_option("--n-t", f.n_t, "time steps per period (0: floor(2T))");
    app->add_option("--method", f.method, "banach, grad or direct");
    app->add_option("--advection", f.advection, "hybrid, central or upwind");
    app->add_option("--tol", f.tol, "tolerance on F");
    app->add_option("--max-iter", f.max_iter, "iteration cap");
}

void apply(const Flags& f, RunConfig& c) {
    if (f.seed) c.mc.seed = *f.seed;
    c.threads = f.threads ? *f.threads : default_threads();
    if (f.family) {
        if (*f.family != c.family) c.params.clear();
        c.family = *f.family;
    }
    for (const auto& kv : f.params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw Error(ErrorCode::InvalidConfig, "cli.flags", "--param expects key=value, got '" + kv + "'");
        c.params[kv.substr(0, eq)] = parse_end(kv.substr(eq + 1));
    }
    if (f.left) c.domain.left = parse_end(*f.left);
    if (f.right) c.domain.right = parse_end(*f.right);
    if (f.s) c.s = *f.s;
    if (f.points) {
        c.initial_states.clear();
        c.initial_count = *f.points;
    }
    if (f.n_paths) c.mc.n_paths = *f.n_paths;
    if (f.dt) c.mc.dt = *f.dt;
    if (f.max_duration) c.mc.max_duration = *f.max_duration;
    if (f.n_x) c.n_x = *f.n_x;
    if (f.n_t) c.n_t = *f.n_t;
    if (f.method) c.method = parse_solver_method(*f.method);
    if (f.advection) {
        RunConfig probe = parse_config("{\"grid\": {\"advection\": \"" + *f.advection + "\"}}");
        c.advection = probe.advection;
    }
    if (f.tol) c.solver.tol_F = *f.tol;
    if (f.max_iter) c.solver.max_iter = *f.max_iter;
    if (!f.at.empty()) c.survival.points = f.at;
    if (f.tail_tol) c.survival.tail_tol = *f.tail_tol;
    auto& r = c.resonance;
    if (!f.sweep.empty()) {
        if (f.sweep.size() != 3)
            throw Error(ErrorCode::InvalidConfig, "cli.flags", "--sweep expects lo,hi,points");
        r.sweep_lo = f.sweep[0];
        r.sweep_hi = f.sweep[1];
        r.sweep_points = static_cast<int>(f.sweep[2]);
    }
    if (!f.bracket.empty()) {
        if (f.bracket.size() != 2) throw Error(ErrorCode::InvalidConfig, "cli.flags", "--bracket expects lo,hi");
        r.bracket_lo = f.bracket[0];
        r.bracket_hi = f.bracket[1];
    }
    if (f.tol_sigma) r.tol_sigma = *f.tol_sigma;
    if (f.target) r.target = *f.target;
    if (f.no_find) r.find = false;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Expected exit times of time-periodic SDEs"};
    app.set_version_flag("--version", std::string(version));
    app.require_subcommand(1);
    Flags f;
    app.add_option("--config", f.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--out", f.out, "output directory");
    app.add_option("--seed", f.seed, "Monte Carlo seed");
    app.add_option("--threads", f.threads, "worker threads (default: EXITTIME_THREADS or 1)");

    auto* mc = app.add_subcommand("mc", "Monte Carlo exit-duration curve");
    add_problem_flags(mc, f);
    add_mc_flags(mc, f);

    auto* pde = app.add_subcommand("pde", "periodic PDE solve");
    add_problem_flags(pde, f);
    add_pde_flags(pde, f);

    auto* compare = app.add_subcommand("compare", "Monte Carlo against the PDE");
    add_problem_flags(compare, f);
    add_mc_flags(compare, f);
    add_pde_flags(compare, f);

    auto* survival = app.add_subcommand("survival", "durations from the survival probability");
    add_problem_flags(survival, f);
    add_pde_flags(survival, f);
    survival->add_option("--at", f.at, "initial states")->delimiter(',');
    survival->add_option("--tail-tol", f.tail_tol, "stop once the survival probability drops below this");

    auto* resonance = app.add_subcommand("resonance", "noise sweep and resonant sigma");
    add_pde_flags(resonance, f);
    resonance->add_option("--sweep", f.sweep, "lo,hi,points")->delimiter(',');
    resonance->add_option("--bracket", f.bracket, "lo,hi")->delimiter(',');
    resonance->add_option("--tol-sigma", f.tol_sigma, "bisection width");
    resonance->add_option("--target", f.target, "target transition time (default T/2)");
    resonance->add_flag("--no-find", f.no_find, "sweep only");

    for (auto* sub : {mc, pde, compare, survival, resonance}) {
        sub->add_option("--config", f.config_path, "JSON run configuration")->check(CLI::ExistingFile);
        sub->add_option("--out", f.out, "output directory");
        sub->add_option("--seed", f.seed, "Monte Carlo seed");
        sub->add_option("--threads", f.threads, "worker threads");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig config = f.config_path.empty() ? RunConfig{} : load_config(f.config_path);
        config.mode = parse_run_mode(app.get_subcommands().front()->get_name());
        apply(f, config);
        const RunOutcome outcome = run(config, f.out);
        std::cout << outcome.summary_json << "\n";
        for (const auto& file : outcome.files) std::cerr << "wrote " << file.string() << "\n";
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
