#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "exittime/error.hpp"
#include "exittime/resonance.hpp"

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

SweepResult fake(double sigma, double value) {
    SweepResult r;
    r.sigma = sigma;
    r.tau_at_one = value;
    r.converged = true;
    return r;
}

ResonanceSetup coarse_setup() {
    ResonanceSetup s;
    s.omega = 0.05;
    s.n_x = 60;
    s.n_t = 64;
    return s;
}

}  // namespace

TEST_CASE("bisection on a decreasing function") {
    int calls = 0;
    auto eval = [&](double s) {
        ++calls;
        return fake(s, 10.0 - 20.0 * s);
    };
    const auto r = find_resonance(3.0, 0.0, 1.0, 1e-3, eval);
    CHECK(r.sigma_star == doctest::Approx(0.35).epsilon(2e-3));
    CHECK(r.sigma_hi - r.sigma_lo <= 1e-3);
    CHECK(r.sigma_lo <= 0.35);
    CHECK(r.sigma_hi >= 0.35);
    CHECK_FALSE(r.non_monotone);
    CHECK(static_cast<int>(r.evaluations.size()) == calls);
    for (std::size_t k = 1; k < r.evaluations.size(); ++k) CHECK(r.evaluations[k].sigma > r.evaluations[k - 1].sigma);
}

TEST_CASE("unbracketed targets are rejected") {
    auto eval = [](double s) { return fake(s, 10.0 - 20.0 * s); };
    CHECK(code_of([&] { find_resonance(11.0, 0.0, 1.0, 1e-3, eval); }) == ErrorCode::NoBracket);
    CHECK(code_of([&] { find_resonance(-20.0, 0.0, 1.0, 1e-3, eval); }) == ErrorCode::NoBracket);
    CHECK(code_of([&] { find_resonance(3.0, 1.0, 0.0, 1e-3, eval); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("non-monotone evaluations are flagged") {
    auto eval = [](double s) { return fake(s, s == 0.5 ? 50.0 : 10.0 - 20.0 * s); };
    const auto r = find_resonance(3.0, 0.0, 1.0, 1e-2, eval);
    CHECK(r.non_monotone);
}

TEST_CASE("failed solves inside the bisection surface as errors") {
    auto eval = [](double s) {
        SweepResult r = fake(s, 10.0 - 20.0 * s);
        if (s == 0.5) r.converged = false;
        return r;
    };
    CHECK(code_of([&] { find_resonance(3.0, 0.0, 1.0, 1e-2, eval); }) == ErrorCode::NotConverged);
}

TEST_CASE("sweep is sorted, decreasing and never aborts") {
    const auto setup = coarse_setup();
    const std::vector<double> sigmas{0.5, 0.3, -0.1, 0.4};
    const auto out = sweep_sigma(sigmas, setup);
    REQUIRE(out.size() == 4);
    CHECK(out[0].sigma == -0.1);
    CHECK_FALSE(out[0].converged);
    CHECK_FALSE(out[0].error.empty());
    for (int k = 1; k < 4; ++k) {
        CHECK(out[k].converged);
        CHECK(out[k].tau_at_one > 0.0);
        CHECK(out[k].truncation_ok);
    }
    CHECK(out[1].tau_at_one > out[2].tau_at_one);
    CHECK(out[2].tau_at_one > out[3].tau_at_one);
    CHECK(sweep_sigma(std::vector<double>{}, setup).empty());
}

TEST_CASE("left to right transition from the reflected solution") {
    const auto setup = coarse_setup();
    const auto sde = setup.sde(0.35);
    const auto grid = setup.grid();
    PeriodicSolution tau;
    SolverOptions tight;
    tight.tol_F = 1e-14;
    const double right_to_left = transition_time_right_to_left(sde, grid, SolverMethod::Direct, tight, 1.0, &tau);
    CHECK(right_to_left == doctest::Approx(interpolate(tau.front(), grid, 1.0)));

    const int half = grid.n_t / 2;
    CHECK(left_to_right_duration(-1.0, tau, sde, grid) == doctest::Approx(interpolate(tau.slices[half], grid, 1.0)));
    CHECK(left_to_right_duration(0.0, tau, sde, grid) == doctest::Approx(interpolate(tau.slices[half], grid, 0.0)));
    CHECK(code_of([&] { left_to_right_duration(2.0, tau, sde, grid); }) == ErrorCode::InvalidArgument);

    // The left to right problem solved directly: same drift, domain (-3, 1), start at -1.
    const double coeffs[] = {0.0, 1.0, 0.0, -1.0};
    const auto same = polynomial_drift(coeffs, setup.amplitude, setup.omega, 0.35);
    const auto mgrid = make_grid(ExitDomain(-3.0, 1.0), same.period, setup.n_x, setup.n_t);
    const double direct = transition_time_right_to_left(same, mgrid, SolverMethod::Direct, tight, -1.0);
    CHECK(left_to_right_duration(-1.0, tau, sde, grid) == doctest::Approx(direct).epsilon(1e-6));

    PeriodicSde1D shifted = sde;
    shifted.unforced_drift = [](double, double x) { return x - x * x * x + 0.5; };
    CHECK(code_of([&] { left_to_right_duration(-1.0, tau, shifted, grid); }) == ErrorCode::SymmetryUnavailable);
    CHECK(code_of([&] { left_to_right_duration(-1.0, to_expected_duration(tau), sde, grid); }) ==
          ErrorCode::InvalidArgument);
}

TEST_CASE("resonance on a coarse problem") {
    const auto setup = coarse_setup();
    const auto lo = evaluate_sigma(0.3, setup);
    const auto hi = evaluate_sigma(0.6, setup);
    REQUIRE(lo.converged);
    REQUIRE(hi.converged);
    const double target = 0.5 * (lo.tau_at_one + hi.tau_at_one);
    const auto r = find_resonance(target, 0.3, 0.6, 0.01, setup);
    CHECK(r.sigma_star > 0.3);
    CHECK(r.sigma_star < 0.6);
    CHECK_FALSE(r.non_monotone);
    const auto at = evaluate_sigma(r.sigma_lo, setup);
    const auto above = evaluate_sigma(r.sigma_hi, setup);
    CHECK(at.tau_at_one >= target);
    CHECK(above.tau_at_one <= target);
}
