#pragma once

#include <span>
#include <vector>

#include "exittime/model.hpp"

namespace exittime {

enum class AdvectionScheme {
    // Central differences, switching to first-order upwind at nodes where the
    // cell Peclet number |b| h / a exceeds 1 (keeps the system an M-matrix).
    Hybrid,
    Central,
    Upwind,
};

/// Uniform interior nodes x_i = a + (i+1) h, i = 0..n_x-1, on (a, b) with
/// homogeneous Dirichlet values at both ends, and n_t uniform steps over [0, T].
struct SpaceTimeGrid {
    double a = 0.0;
    double b = 1.0;
    int n_x = 3;
    int n_t = 1;
    double period = 1.0;
    AdvectionScheme advection = AdvectionScheme::Hybrid;

    double h() const { return (b - a) / (n_x + 1); }
    double dt() const { return period / n_t; }
    double x(int i) const { return a + (i + 1) * h(); }
    double t(int n) const { return period * n / n_t; }
    std::vector<double> nodes() const;
};

SpaceTimeGrid make_grid(const ExitDomain& domain, double period, int n_x, int n_t,
                        AdvectionScheme advection = AdvectionScheme::Hybrid);

/// floor(2 T) time steps per period.
int default_time_steps(double period);

/// Values at the interior nodes of one time slice; boundary values are zero.
struct Field {
    std::vector<double> values;
    double time = 0.0;

    Field() = default;
    explicit Field(std::size_t n, double time_label = 0.0) : values(n, 0.0), time(time_label) {}
    Field(std::vector<double> v, double time_label) : values(std::move(v)), time(time_label) {}
    std::size_t size() const { return values.size(); }
};

/// Inhomogeneity f(s, x) of the time-reversed problem.
class Source {
public:
    static Source zero();
    static Source constant(double value);
    static Source function(CoefficientFn fn);

    bool is_zero() const { return !fn_ && constant_ == 0.0; }
    void sample(double s, const SpaceTimeGrid& grid, std::span<double> out) const;
    bool nonnegative_on(const SpaceTimeGrid& grid) const;

private:
    double constant_ = 0.0;
    CoefficientFn fn_;
};

enum class OperatorKind {
    Generator,  // L(s) f = b f' + (a/2) f''
    Reversed,   // L_R(s) = L(T - s)
    Adjoint,    // L*(s) f = -(b f)' + ((a/2) f)''
};

/// Tridiagonal matrix on the interior nodes; row i couples x_{i-1}, x_i, x_{i+1}.
/// lower[0] and upper[n-1] are unused (Dirichlet rows eliminated).
struct TridiagonalOperator {
    std::vector<double> lower, diagonal, upper;
    double time = 0.0;
    OperatorKind kind = OperatorKind::Generator;

    std::vector<double> apply(std::span<const double> f) const;
    TridiagonalOperator transposed() const;
};

TridiagonalOperator assemble_generator(const PeriodicSde1D& sde, double s, const SpaceTimeGrid& grid,
                                       OperatorKind kind);

struct GridAdvisory {
    double max_cell_peclet = 0.0;  // max |b| h / a
    double cfl = 0.0;              // dt max|b| / h
    int upwind_nodes = 0;          // nodes that fell back to upwind at the sampled times
};

GridAdvisory grid_advisory(const PeriodicSde1D& sde, const SpaceTimeGrid& grid, int time_samples = 16);

/// Implicit Euler stepper for v' = Op(s) v + f(s) with reusable workspace.
/// Coefficients are taken at the time passed to step().
class BackwardEulerStepper {
public:
    BackwardEulerStepper(const PeriodicSde1D& sde, const SpaceTimeGrid& grid, OperatorKind kind);

    /// v <- (I - dt Op(s_next))^{-1} (v + dt f(s_next)).
    void step(std::span<double> v, double s_next, const Source& f);

    /// Factorizes I - dt Op(s_next); subsequent solve() calls reuse it.
    void factor(double s_next);
    void solve(std::span<double> rhs) const;

    const SpaceTimeGrid& grid() const { return grid_; }

private:
    PeriodicSde1D sde_;
    SpaceTimeGrid grid_;
    OperatorKind kind_;
    TridiagonalOperator op_;
    std::vector<double> pivot_inv_, upper_mod_, sub_, source_;
};

Field step_backward_euler(const Field& field, double s_next, OperatorKind kind, const Source& f,
                          const SpaceTimeGrid& grid, const PeriodicSde1D& sde);

/// Homogeneous time-reversed evolution Phi(r, s) for lattice times 0 <= r <= s <= T.
Field evolve_phi(const Field& initial, double r, double s, const PeriodicSde1D& sde,
                 const SpaceTimeGrid& grid);

/// One period of the inhomogeneous time-reversed problem starting from phi:
/// A phi = Phi(0,T) phi + int_0^T Phi(r,T) f(r) dr. The result is relabelled to
/// time 0. When `slices` is given it receives all n_t + 1 time slices.
Field apply_period_operator(const Field& phi, const Source& f, const PeriodicSde1D& sde,
                            const SpaceTimeGrid& grid, std::vector<Field>* slices = nullptr);

/// Absorbing Fokker-Planck evolution W(0, s) w0, implicit in the state with
/// coefficients frozen at the start of each step.
Field evolve_w(const Field& w0, double s, const PeriodicSde1D& sde, const SpaceTimeGrid& grid);

struct SurvivalResult {
    double duration = 0.0;          // int G dt
    std::vector<double> survival;   // G at s + k dt, k = 0, 1, ...
    double dt = 0.0;
};

/// Expected duration from (s, x_index) as the time integral of the survival
/// probability of a discrete delta evolved by the absorbing Fokker-Planck
/// equation. Throws NoDecay if G stays above tail_tol for max_periods periods.
SurvivalResult survival_duration(const PeriodicSde1D& sde, const SpaceTimeGrid& grid, double s,
                                 int x_index, double tail_tol, int max_periods = 50);

/// Discrete L2 inner product and norm with uniform weight h.
double inner(std::span<const double> u, std::span<const double> v, double h);
double l2_norm(std::span<const double> u, double h);

/// Index n with t(n) == s, or OffLattice.
int lattice_index(const SpaceTimeGrid& grid, double s, const char* op);

}  // namespace exittime
