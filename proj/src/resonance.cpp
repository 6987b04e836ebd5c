#include "exittime/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "exittime/error.hpp"
#include "parallel.hpp"

namespace exittime {

PeriodicSde1D ResonanceSetup::sde(double sigma) const { return duffing(amplitude, omega, sigma); }

SpaceTimeGrid ResonanceSetup::grid() const {
    const double period = 2.0 * std::numbers::pi / omega;
    return make_grid(domain, period, n_x, n_t > 0 ? n_t : default_time_steps(period), advection);
}

double transition_time_right_to_left(const PeriodicSde1D& sde, const SpaceTimeGrid& grid, SolverMethod method,
                                     const SolverOptions& options, double x, PeriodicSolution* solution) {
    SolveResult result = solve_periodic(method, Source::constant(1.0), sde, grid, options);
    PeriodicSolution tau = to_expected_duration(result.solution);
    const double value = interpolate(tau.front(), grid, x);
    if (solution) *solution = std::move(tau);
    return value;
}

double left_to_right_duration(double x, const PeriodicSolution& tau, const PeriodicSde1D& sde,
                              const SpaceTimeGrid& grid, double tol) {
    const char* op = "resonance.left_to_right_duration";
    if (!sde.unforced_drift || !is_odd_drift(sde.unforced_drift, sde.period, tol))
        throw Error(ErrorCode::SymmetryUnavailable, op, "unforced drift is not odd");
    if (!tau.expected_duration)
        throw Error(ErrorCode::InvalidArgument, op, "solution must hold expected durations");
    if (tau.slices.size() != static_cast<std::size_t>(grid.n_t) + 1)
        throw Error(ErrorCode::InvalidArgument, op, "slice count does not match grid");
    const double y = -x;
    if (!(y >= grid.a && y <= grid.b))
        throw Error(ErrorCode::InvalidArgument, op, "x lies outside the reflected domain");

    const double pos = 0.5 * grid.n_t;
    const int k = static_cast<int>(std::floor(pos));
    const double w = pos - k;
    const double lo = interpolate(tau.slices[k], grid, y);
    if (w == 0.0) return lo;
    return (1.0 - w) * lo + w * interpolate(tau.slices[k + 1], grid, y);
}

SweepResult evaluate_sigma(double sigma, const ResonanceSetup& setup) {
    SweepResult r;
    r.sigma = sigma;
    r.solver = to_string(setup.method);
    try {
        if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "resonance.evaluate_sigma", "sigma must be positive");
        const PeriodicSde1D sde = setup.sde(sigma);
        const DissipativityCoefficients dc = dissipativity_coefficients(sde, setup.lambda);
        // The physical domain is the half line beyond the left target.
        const ExitDomain physical(setup.domain.left, std::numeric_limits<double>::infinity());
        const DissipativityCertificate cert = truncation_radius(dc.c, dc.lambda, sigma, boundary_radius(physical),
                                                                std::abs(setup.x_eval), setup.safety);
        r.R_star = cert.R_star;
        r.truncation_ok = cert.R_star <= setup.domain.upper();

        const SpaceTimeGrid grid = setup.grid();
        SolveResult result = solve_periodic(setup.method, Source::constant(1.0), sde, grid, setup.options);
        r.iterations = result.report.iterations;
        r.converged = result.report.converged;
        const PeriodicSolution tau = to_expected_duration(result.solution);
        r.tau_at_one = interpolate(tau.front(), grid, setup.x_eval);
    } catch (const Error& e) {
        r.converged = false;
        r.error = e.what();
    }
    return r;
}

std::vector<SweepResult> sweep_sigma(std::span<const double> sigmas, const ResonanceSetup& setup) {
    std::vector<double> sorted(sigmas.begin(), sigmas.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<SweepResult> out(sorted.size());
    detail::parallel_for(static_cast<int>(sorted.size()), setup.threads,
                         [&](int j) { out[j] = evaluate_sigma(sorted[j], setup); });
    return out;
}

ResonanceResult find_resonance(double target, double sigma_lo, double sigma_hi, double tol_sigma,
                               const std::function<SweepResult(double)>& evaluate) {
    const char* op = "resonance.find_resonance";
    if (!(sigma_lo < sigma_hi)) throw Error(ErrorCode::InvalidArgument, op, "bracket must satisfy lo < hi");
    if (!(tol_sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, op, "tol_sigma must be positive");

    std::map<double, SweepResult> memo;
    auto tau = [&](double sigma) {
        auto it = memo.find(sigma);
        if (it == memo.end()) it = memo.emplace(sigma, evaluate(sigma)).first;
        const SweepResult& r = it->second;
        if (!r.converged)
            throw Error(ErrorCode::NotConverged, op,
                        "solve at sigma = " + std::to_string(sigma) + " failed: " + r.error);
        return r.tau_at_one;
    };

    ResonanceResult out;
    out.target = target;
    double lo = sigma_lo, hi = sigma_hi;
    double tau_lo = tau(lo), tau_hi = tau(hi);
    if (!(tau_lo >= target && target >= tau_hi))
        throw Error(ErrorCode::NoBracket, op,
                    "tau(" + std::to_string(lo) + ") = " + std::to_string(tau_lo) + " and tau(" + std::to_string(hi) +
                        ") = " + std::to_string(tau_hi) + " do not straddle " + std::to_string(target));
    while (hi - lo > tol_sigma) {
        const double mid = 0.5 * (lo + hi);
        const double value = tau(mid);
        if (value > tau_lo || value < tau_hi) out.non_monotone = true;
        if (value > target) {
            lo = mid;
            tau_lo = value;
        } else {
            hi = mid;
            tau_hi = value;
        }
    }
    out.sigma_lo = lo;
    out.sigma_hi = hi;
    out.sigma_star = 0.5 * (lo + hi);
    for (auto& [sigma, r] : memo) out.evaluations.push_back(r);
    return out;
}

ResonanceResult find_resonance(double target, double sigma_lo, double sigma_hi, double tol_sigma,
                               const ResonanceSetup& setup) {
    return find_resonance(target, sigma_lo, sigma_hi, tol_sigma,
                          [&](double sigma) { return evaluate_sigma(sigma, setup); });
}

}  // namespace exittime
