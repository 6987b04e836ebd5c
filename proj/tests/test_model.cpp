#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "exittime/error.hpp"
#include "exittime/model.hpp"

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

}  // namespace

TEST_CASE("duffing coefficients") {
    const auto sde = duffing(0.12, 1e-3, 0.285);
    CHECK(sde.period == doctest::Approx(2000.0 * std::numbers::pi));
    CHECK(sde.b(0.0, 0.5) == doctest::Approx(0.5 - 0.125 + 0.12));
    CHECK(sde.b(sde.period / 2, 0.5) == doctest::Approx(0.5 - 0.125 - 0.12));
    CHECK(sde.sigma(3.0, -2.0) == doctest::Approx(0.285));
    CHECK(sde.unforced_drift(1.0, 2.0) == doctest::Approx(2.0 - 8.0));
}

TEST_CASE("zero frequency needs an explicit period") {
    const auto sde = brownian_periodic_drift(0.0, 0.0, 0.0, 1.0);
    CHECK(sde.period == doctest::Approx(1.0));
    CHECK(code_of([] { duffing(0.1, 1.0, 0.3, -1.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("make_sde families and unknown keys") {
    const auto p = make_sde("polynomial", {{"c1", 1.0}, {"c3", -1.0}, {"A", 0.12}, {"omega", 1e-3}, {"sigma", 0.285}});
    const auto d = duffing(0.12, 1e-3, 0.285);
    for (double x : {-1.5, -0.2, 0.7, 2.9}) CHECK(p.b(123.0, x) == doctest::Approx(d.b(123.0, x)));
    CHECK(make_sde("duffing", {}).sigma(0, 0) == doctest::Approx(0.285));
    CHECK(make_sde("periodic_ou", {{"alpha", 2.0}}).b(0.0, 1.0) == doctest::Approx(1.0 - 2.0));
    CHECK(code_of([] { make_sde("duffing", {{"beta", 1.0}}); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { make_sde("langevin", {}); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("periodicity check") {
    const auto sde = duffing(0.12, 1e-3, 0.285);
    const auto rep = check_periodicity(sde, {0.0, 3 * sde.period, -2.0, 3.0}, 1e-9);
    CHECK(rep.periodic);
    CHECK(rep.max_drift_gap < 1e-9);

    PeriodicSde1D drifting = sde;
    drifting.drift = [](double t, double x) { return -x + 1e-3 * t; };
    CHECK_FALSE(check_periodicity(drifting, {0.0, 2 * sde.period, -1.0, 1.0}, 1e-6).periodic);
}

TEST_CASE("dissipativity of the periodic OU drift") {
    // sup_x 2x(S - alpha x) + alpha x^2 = S^2 / alpha
    const double alpha = 2.0, s_amp = 1.5;
    const auto sde = periodic_ou(alpha, 0.0, s_amp, 1.0, 0.5);
    const auto dc = dissipativity_coefficients(sde, alpha);
    CHECK(dc.lambda == alpha);
    CHECK(dc.c == doctest::Approx(s_amp * s_amp / alpha).epsilon(1e-3));
}

TEST_CASE("dissipativity of the duffing drift") {
    const auto dc = dissipativity_coefficients(duffing(0.12, 1e-3, 0.285), 1.0);
    const double closed = duffing_dissipativity_constant(1.0, 0.12);
    CHECK(closed == doctest::Approx(1.0 + 0.24 + 0.25));
    CHECK(dc.c > 1.125);
    CHECK(dc.c <= closed);
}

TEST_CASE("zero drift is not weakly dissipative") {
    const auto sde = brownian_periodic_drift(0.0, 0.0, 0.0, 1.0);
    CHECK(code_of([&] { dissipativity_coefficients(sde, 1.0); }) == ErrorCode::NotDissipative);
}

TEST_CASE("truncation radius") {
    SUBCASE("duffing certificate fits the (-1, 3) domain") {
        const double c = duffing_dissipativity_constant(1.0, 0.12);
        const auto cert = truncation_radius(c, 1.0, 0.285, 1.0, 1.0);
        CHECK(cert.r_star == doctest::Approx(1.25).epsilon(0.005));
        CHECK(cert.R_star <= 3.0);
    }
    SUBCASE("OU closed form") {
        const double alpha = 0.5, s = 2.0, sig = 0.7;
        const auto cert = truncation_radius(s * s / alpha, alpha, sig, 0.0, 0.0);
        CHECK(cert.r_star * cert.r_star == doctest::Approx((s * s / alpha + sig * sig) / alpha));
    }
    SUBCASE("degenerate zero") {
        const auto cert = truncation_radius(0.0, 1.0, 0.0, 0.0, 0.0);
        CHECK(cert.r_star == 0.0);
        CHECK(cert.R_star == 0.0);
    }
    SUBCASE("monotone in c, sigma and lambda") {
        const double base = truncation_radius(1.0, 1.0, 0.3, 0, 0).r_star;
        CHECK(truncation_radius(1.2, 1.0, 0.3, 0, 0).r_star >= base);
        CHECK(truncation_radius(1.0, 1.0, 0.4, 0, 0).r_star >= base);
        CHECK(truncation_radius(1.0, 0.8, 0.3, 0, 0).r_star >= base);
    }
    CHECK(code_of([] { truncation_radius(1.0, 0.0, 0.3, 0, 0); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { truncation_radius(1.0, 1.0, 0.3, 0, 0, 0.5); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("domains") {
    const double inf = std::numeric_limits<double>::infinity();
    ExitDomain half(-1.0, inf);
    CHECK_FALSE(half.bounded());
    CHECK(boundary_radius(half) == 1.0);
    const std::vector<double> starts{1.0};
    const auto cut = half.truncated(3.0, starts);
    CHECK(cut.bounded());
    CHECK(cut.upper() == 3.0);
    CHECK(cut.lower() == -1.0);
    CHECK(cut.contains(2.5));
    CHECK_FALSE(cut.contains(3.0));
    const std::vector<double> far{5.0};
    CHECK(code_of([&] { half.truncated(3.0, far); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { ExitDomain(1.0, 1.0); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { boundary_radius(ExitDomain(-inf, inf)); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("odd drift detection") {
    auto duff = [](double, double x) { return x - x * x * x; };
    auto shifted = [](double, double x) { return x - x * x * x + 0.5; };
    auto zero = [](double, double) { return 0.0; };
    CHECK(is_odd_drift(duff, 1.0, 1e-12));
    CHECK_FALSE(is_odd_drift(shifted, 1.0, 1e-12));
    CHECK(is_odd_drift(zero, 1.0, 1e-12));
}
