#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "exittime/discretize.hpp"
#include "exittime/error.hpp"

namespace exittime {

enum class SolverMethod { Banach, Gradient, Direct };

SolverMethod parse_solver_method(const std::string& name);
const char* to_string(SolverMethod method);

struct SolverOptions {
    double tol_F = 1e-5;
    int max_iter = 500;
    // Adaptive step rule of the gradient solver.
    double initial_step = 1.0;
    double step_growth = 1.5;
    double step_shrink = 0.5;
    double min_step = 1e-8;
};

/// A field per time slice over [0, T]. Holds either the time-reversed solution
/// v (expected_duration == false) or tau(s, x) = v(T - s, x).
struct PeriodicSolution {
    std::vector<Field> slices;
    std::string solver;
    int iterations = 0;
    double final_cost = 0.0;
    bool expected_duration = false;

    const Field& front() const { return slices.front(); }
    const Field& back() const { return slices.back(); }
};

struct SolverReport {
    std::vector<double> cost_history;
    std::vector<double> contraction_estimates;
    std::vector<double> step_sizes;  // accepted steps, gradient solver only
    bool converged = false;
    double tolerance_used = 0.0;
    int iterations = 0;
    int period_sweeps = 0;
    // Direct solver only.
    double spectral_radius = 0.0;
    double condition_estimate = 0.0;
};

struct SolveResult {
    PeriodicSolution solution;
    SolverReport report;
};

class NotConverged : public Error {
public:
    NotConverged(std::string operation, const std::string& detail, SolverReport report)
        : Error(ErrorCode::NotConverged, std::move(operation), detail), report_(std::move(report)) {}
    const SolverReport& report() const noexcept { return report_; }

private:
    SolverReport report_;
};

/// F(phi) = 1/2 || A phi - phi ||^2.
double cost_F(const Field& phi, const Source& f, const PeriodicSde1D& sde, const SpaceTimeGrid& grid);

/// dF/dphi = W(0,T) w0 - w0 with w0 = A phi - phi.
Field gradient_F(const Field& phi, const Source& f, const PeriodicSde1D& sde, const SpaceTimeGrid& grid);

/// Fixed-point iteration v_{k+1} = A v_k from v_0 = 0.
SolveResult solve_banach(const Source& f, const PeriodicSde1D& sde, const SpaceTimeGrid& grid,
                         const SolverOptions& options = {});

/// Adaptive-step projected gradient descent on F.
SolveResult solve_gradient(const Source& f, const PeriodicSde1D& sde, const SpaceTimeGrid& grid,
                           const SolverOptions& options = {});

/// Dense solve of (I - Phi(0,T)) v0 = A 0.
SolveResult solve_direct(const Source& f, const PeriodicSde1D& sde, const SpaceTimeGrid& grid,
                         const SolverOptions& options = {});

SolveResult solve_periodic(SolverMethod method, const Source& f, const PeriodicSde1D& sde,
                           const SpaceTimeGrid& grid, const SolverOptions& options = {});

/// Dense matrix of Phi(0,T), column-major, n_x * n_x entries.
std::vector<double> dense_period_matrix(const PeriodicSde1D& sde, const SpaceTimeGrid& grid);

double bilinear_form(const Field& phi, const Field& psi, double s, const PeriodicSde1D& sde,
                     const SpaceTimeGrid& grid);

/// ||phi||^2_{L2} + ||phi'||^2_{L2} with forward differences over all cells.
double h1_norm_squared(const Field& phi, const SpaceTimeGrid& grid);

struct CoercivityEstimate {
    double alpha_hat = 0.0;
    double worst_time = 0.0;
};

/// Minimum of B_R[phi, phi; s] over random unit-H1 fields and lattice times.
/// A positive value is evidence, not proof, of coercivity.
CoercivityEstimate coercivity_probe(const PeriodicSde1D& sde, const SpaceTimeGrid& grid, int n_samples,
                                    std::uint64_t seed = 0);

/// Sharp interval Poincare constant (|D| / pi)^2.
double poincare_constant(double length);

/// min(sigma^2 / 4, sigma^2 / (4 C_D)) for Brownian motion with periodic drift.
double brownian_coercivity_constant(double sigma, double length);

/// Slice s -> slice T - s. Involutive.
PeriodicSolution to_expected_duration(const PeriodicSolution& v);

/// max |d_s u + L(s) u + 1| over interior lattice times, centred in s.
double verify_pde_residual(const PeriodicSolution& tau, const PeriodicSde1D& sde, const SpaceTimeGrid& grid);

/// Linear interpolation of a field at x, using zero boundary values.
double interpolate(const Field& field, const SpaceTimeGrid& grid, double x);

/// ||u - v|| / ||v||.
double relative_l2(std::span<const double> u, std::span<const double> v);

}  // namespace exittime
