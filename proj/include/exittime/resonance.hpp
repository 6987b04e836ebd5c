#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "exittime/periodic.hpp"

namespace exittime {

/// Forced double well with a tunable noise level, solved on a fixed domain.
struct ResonanceSetup {
    double amplitude = 0.12;
    double omega = 1e-3;
    ExitDomain domain{-1.0, 3.0};
    int n_x = 500;
    int n_t = 0;  // 0 selects default_time_steps(T)
    AdvectionScheme advection = AdvectionScheme::Hybrid;
    SolverMethod method = SolverMethod::Banach;
    SolverOptions options{};
    double x_eval = 1.0;
    double lambda = 1.0;  // dissipativity exponent for the truncation check
    double safety = 2.0;
    int threads = 1;

    PeriodicSde1D sde(double sigma) const;
    SpaceTimeGrid grid() const;
};

struct SweepResult {
    double sigma = 0.0;
    double tau_at_one = 0.0;
    std::string solver;
    bool converged = false;
    int iterations = 0;
    double R_star = 0.0;
    bool truncation_ok = false;  // R_star <= domain upper end
    std::string error;           // empty unless the solve failed
};

/// Expected duration tau(0, x) to leave the grid interval, from a periodic
/// solve with f = 1. When `solution` is given it receives tau on all slices.
double transition_time_right_to_left(const PeriodicSde1D& sde, const SpaceTimeGrid& grid, SolverMethod method,
                                     const SolverOptions& options = {}, double x = 1.0,
                                     PeriodicSolution* solution = nullptr);

/// Reverse transition for an odd unforced drift: the reflected process run from
/// (0, x) is the original one run from (T/2, -x), so this returns tau(T/2, -x).
/// `tau` must hold expected durations (see to_expected_duration).
double left_to_right_duration(double x, const PeriodicSolution& tau, const PeriodicSde1D& sde,
                              const SpaceTimeGrid& grid, double tol = 1e-10);

SweepResult evaluate_sigma(double sigma, const ResonanceSetup& setup);

/// Independent solves, returned in increasing sigma. Failures are recorded per
/// entry and never abort the sweep.
std::vector<SweepResult> sweep_sigma(std::span<const double> sigmas, const ResonanceSetup& setup);

struct ResonanceResult {
    double sigma_star = 0.0;
    double sigma_lo = 0.0;  // final bracket
    double sigma_hi = 0.0;
    double target = 0.0;
    bool non_monotone = false;
    std::vector<SweepResult> evaluations;  // every distinct solve, sorted by sigma
};

/// Bisection on sigma -> tau_sigma(x_eval) - target, assumed decreasing, until
/// the bracket is narrower than tol_sigma. Returns the bracket midpoint.
ResonanceResult find_resonance(double target, double sigma_lo, double sigma_hi, double tol_sigma,
                               const ResonanceSetup& setup);

/// Same bisection over an arbitrary evaluator.
ResonanceResult find_resonance(double target, double sigma_lo, double sigma_hi, double tol_sigma,
                               const std::function<SweepResult(double)>& evaluate);

}  // namespace exittime
