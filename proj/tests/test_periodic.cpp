#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "exittime/error.hpp"
#include "exittime/periodic.hpp"

using namespace exittime;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an exception");
    return ErrorCode::InvalidArgument;
}

Field random_field(int n, std::uint64_t seed, double scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Field f(n, 0.0);
    for (double& v : f.values) v = scale * normal(rng);
    return f;
}

double max_oracle_error(const PeriodicSolution& tau, const SpaceTimeGrid& g) {
    double worst = 0.0;
    for (const auto& slice : tau.slices)
        for (int i = 0; i < g.n_x; ++i) worst = std::max(worst, std::abs(slice.values[i] - g.x(i) * (1 - g.x(i))));
    return worst;
}

}  // namespace

TEST_CASE("solver names") {
    CHECK(parse_solver_method("banach") == SolverMethod::Banach);
    CHECK(parse_solver_method("grad") == SolverMethod::Gradient);
    CHECK(parse_solver_method("direct") == SolverMethod::Direct);
    CHECK(std::string(to_string(SolverMethod::Gradient)) == "grad");
    CHECK(code_of([] { parse_solver_method("newton"); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("brownian motion reproduces x(1-x) with every solver") {
    const auto sde = brownian_periodic_drift(0.0, 0.0, 0.0, 1.0, 1.0);
    const auto g = make_grid(ExitDomain(0.0, 1.0), 1.0, 99, 4);
    SolverOptions opt;
    opt.tol_F = 1e-12;
    for (auto method : {SolverMethod::Banach, SolverMethod::Gradient, SolverMethod::Direct}) {
        const auto r = solve_periodic(method, Source::constant(1.0), sde, g, opt);
        CHECK(r.report.converged);
        const auto tau = to_expected_duration(r.solution);
        CHECK(tau.expected_duration);
        CHECK(max_oracle_error(tau, g) < 1e-3);
    }
}

TEST_CASE("f = 0 gives the zero solution") {
    const auto sde = duffing(0.12, 0.5, 0.4);
    const auto g = make_grid(ExitDomain(-1.0, 3.0), sde.period, 30, 16);
    const auto r = solve_banach(Source::zero(), sde, g);
    CHECK(r.report.iterations == 1);
    for (const auto& s : r.solution.slices)
        for (double v : s.values) CHECK(v == 0.0);
}

TEST_CASE("cost vanishes at the periodic solution and gradient matches finite differences") {
    const auto sde = duffing(0.12, 0.05, 0.3);
    const auto g = make_grid(ExitDomain(-1.0, 3.0), sde.period, 40, 60);
    const Source one = Source::constant(1.0);
    SolverOptions opt;
    opt.tol_F = 1e-14;
    const auto sol = solve_direct(one, sde, g, opt);
    CHECK(cost_F(sol.solution.front(), one, sde, g) < 1e-12);

    const Field phi = random_field(g.n_x, 7, 5.0);
    const Field dir = random_field(g.n_x, 8);
    const Field grad = gradient_F(phi, one, sde, g);
    const double eps = 1e-3;
    Field plus = phi, minus = phi;
    for (int i = 0; i < g.n_x; ++i) {
        plus.values[i] += eps * dir.values[i];
        minus.values[i] -= eps * dir.values[i];
    }
    const double fd = (cost_F(plus, one, sde, g) - cost_F(minus, one, sde, g)) / (2 * eps);
    // gradient_F is the Riesz representative in the h-weighted inner product.
    const double ad = inner(grad.values, dir.values, g.h());
    CHECK(ad == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("banach reports its contraction and fails loudly") {
    const auto sde = brownian_periodic_drift(0.2, 0.5, 2 * std::numbers::pi, 0.05);
    const auto g = make_grid(ExitDomain(0.0, 1.0), sde.period, 50, 20);
    SolverOptions opt;
    opt.max_iter = 2;
    opt.tol_F = 1e-14;
    try {
        solve_banach(Source::constant(1.0), sde, g, opt);
        FAIL("expected NotConverged");
    } catch (const NotConverged& e) {
        CHECK(e.code() == ErrorCode::NotConverged);
        CHECK(e.report().cost_history.size() == 2);
        CHECK_FALSE(e.report().converged);
        CHECK(e.report().contraction_estimates.size() == 1);
        CHECK(e.report().contraction_estimates[0] > 0.5);
    }
}

TEST_CASE("gradient descent clamps at zero for non-negative sources") {
    const auto sde = duffing(0.12, 0.005, 0.3);
    const auto g = make_grid(ExitDomain(-1.0, 3.0), sde.period, 40, 60);
    const auto r = solve_gradient(Source::constant(1.0), sde, g);
    CHECK(r.report.converged);
    CHECK(r.report.step_sizes.size() == static_cast<std::size_t>(r.report.iterations));
    for (std::size_t k = 1; k < r.report.cost_history.size(); ++k)
        CHECK(r.report.cost_history[k] < r.report.cost_history[k - 1]);
    for (const auto& s : r.solution.slices)
        for (double v : s.values) CHECK(v >= 0.0);
}

TEST_CASE("direct solver diagnostics") {
    const auto sde = duffing(0.12, 0.05, 0.3);
    const auto g = make_grid(ExitDomain(-1.0, 3.0), sde.period, 40, 60);
    const auto r = solve_direct(Source::constant(1.0), sde, g);
    CHECK(r.report.spectral_radius > 0.0);
    CHECK(r.report.spectral_radius < 1.0);
    CHECK(r.report.condition_estimate >= 1.0);

    // A nearly frozen process makes I - Phi(0,T) numerically singular.
    const auto slow = brownian_periodic_drift(0.0, 0.0, 0.0, 1e-7, 1e-3);
    const auto gs = make_grid(ExitDomain(0.0, 1.0), 1e-3, 20, 1);
    CHECK(code_of([&] { solve_direct(Source::constant(1.0), slow, gs); }) == ErrorCode::IllConditioned);

    const auto big = make_grid(ExitDomain(0.0, 1.0), 1.0, 2001, 1);
    CHECK(code_of([&] { solve_direct(Source::constant(1.0), sde, big); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("dense period matrix agrees with the sweep") {
    const auto sde = duffing(0.12, 0.05, 0.3);
    const auto g = make_grid(ExitDomain(-1.0, 3.0), sde.period, 25, 30);
    const auto m = dense_period_matrix(sde, g);
    const Field phi = random_field(g.n_x, 11);
    const Field out = evolve_phi(phi, 0.0, g.period, sde, g);
    for (int i = 0; i < g.n_x; ++i) {
        double acc = 0.0;
        for (int j = 0; j < g.n_x; ++j) acc += m[static_cast<std::size_t>(j) * g.n_x + i] * phi.values[j];
        CHECK(acc == doctest::Approx(out.values[i]).epsilon(1e-10));
    }
}

TEST_CASE("time reversal is an involution") {
    const auto sde = duffing(0.12, 0.05, 0.3);
    const auto g = make_grid(ExitDomain(-1.0, 3.0), sde.period, 20, 10);
    const auto v = solve_banach(Source::constant(1.0), sde, g).solution;
    const auto tau = to_expected_duration(v);
    CHECK(tau.slices[3].values == v.slices[7].values);
    CHECK(tau.slices[3].time == v.slices[3].time);
    const auto back = to_expected_duration(tau);
    CHECK_FALSE(back.expected_duration);
    for (std::size_t k = 0; k < v.slices.size(); ++k) CHECK(back.slices[k].values == v.slices[k].values);
}

TEST_CASE("expected duration satisfies the backward equation") {
    const auto sde = duffing(0.12, 0.5, 0.4);
    const auto g = make_grid(ExitDomain(-1.0, 3.0), sde.period, 40, 400);
    SolverOptions opt;
    opt.tol_F = 1e-12;
    const auto tau = to_expected_duration(solve_banach(Source::constant(1.0), sde, g, opt).solution);
    double scale = 0.0;
    for (double v : tau.front().values) scale = std::max(scale, v);
    CHECK(verify_pde_residual(tau, sde, g) < 0.05 * std::max(1.0, scale / sde.period));
}

TEST_CASE("coercivity of brownian motion with periodic drift") {
    const double sigma = 0.8, L = 2.0;
    const auto sde = brownian_periodic_drift(0.3, 1.0, 2 * std::numbers::pi, sigma);
    const auto g = make_grid(ExitDomain(0.0, L), sde.period, 200, 32);
    const auto est = coercivity_probe(sde, g, 32, 5);
    const double alpha = brownian_coercivity_constant(sigma, L);
    CHECK(alpha == doctest::Approx(std::min(sigma * sigma / 4, sigma * sigma / (4 * poincare_constant(L)))));
    CHECK(est.alpha_hat > 0.0);
    CHECK(est.alpha_hat >= alpha);
    CHECK(poincare_constant(std::numbers::pi) == doctest::Approx(1.0));
}

TEST_CASE("bilinear form of pure diffusion is the dirichlet energy") {
    const auto sde = brownian_periodic_drift(0.0, 0.0, 0.0, 1.0, 1.0);
    const auto g = make_grid(ExitDomain(0.0, 1.0), 1.0, 400, 1);
    Field phi(g.n_x, 0.0);
    for (int i = 0; i < g.n_x; ++i) phi.values[i] = std::sin(std::numbers::pi * g.x(i));
    // 1/2 int (phi')^2 = pi^2 / 4
    CHECK(bilinear_form(phi, phi, 0.0, sde, g) == doctest::Approx(std::numbers::pi * std::numbers::pi / 4).epsilon(1e-4));
    CHECK(h1_norm_squared(phi, g) == doctest::Approx(0.5 + std::numbers::pi * std::numbers::pi / 2).epsilon(1e-4));
}

TEST_CASE("interpolation and relative error") {
    const auto g = make_grid(ExitDomain(0.0, 1.0), 1.0, 3, 1);
    const Field f({1.0, 2.0, 3.0}, 0.0);
    CHECK(interpolate(f, g, 0.25) == doctest::Approx(1.0));
    CHECK(interpolate(f, g, 0.375) == doctest::Approx(1.5));
    CHECK(interpolate(f, g, 0.125) == doctest::Approx(0.5));
    CHECK(interpolate(f, g, 1.0) == doctest::Approx(0.0));
    CHECK(code_of([&] { interpolate(f, g, 1.5); }) == ErrorCode::InvalidArgument);
    const std::vector<double> a{1.0, 2.0}, b{1.0, 2.0};
    CHECK(relative_l2(a, b) == 0.0);
}
