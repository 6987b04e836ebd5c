#include "exittime/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "exittime/error.hpp"

namespace exittime {

std::vector<double> SpaceTimeGrid::nodes() const {
    std::vector<double> x(n_x);
    for (int i = 0; i < n_x; ++i) x[i] = this->x(i);
    return x;
}

SpaceTimeGrid make_grid(const ExitDomain& domain, double period, int n_x, int n_t, AdvectionScheme advection) {
    const char* op = "discretize.make_grid";
    if (!domain.bounded()) throw Error(ErrorCode::InvalidArgument, op, "domain must be bounded (truncate first)");
    if (n_x < 3) throw Error(ErrorCode::InvalidArgument, op, "n_x must be >= 3");
    if (n_t < 1) throw Error(ErrorCode::InvalidArgument, op, "n_t must be >= 1");
    if (!(period > 0.0)) throw Error(ErrorCode::InvalidArgument, op, "period must be positive");
    return SpaceTimeGrid{domain.lower(), domain.upper(), n_x, n_t, period, advection};
}

int default_time_steps(double period) { return std::max(1, static_cast<int>(std::floor(2.0 * period))); }

Source Source::zero() { return Source{}; }

Source Source::constant(double value) {
    Source s;
    s.constant_ = value;
    return s;
}

Source Source::function(CoefficientFn fn) {
    Source s;
    s.fn_ = std::move(fn);
    return s;
}

void Source::sample(double s, const SpaceTimeGrid& grid, std::span<double> out) const {
    if (fn_) {
        for (int i = 0; i < grid.n_x; ++i) out[i] = fn_(s, grid.x(i));
    } else {
        std::fill(out.begin(), out.end(), constant_);
    }
}

bool Source::nonnegative_on(const SpaceTimeGrid& grid) const {
    if (!fn_) return constant_ >= 0.0;
    std::vector<double> buf(grid.n_x);
    const int samples = std::min(grid.n_t, 64);
    for (int k = 0; k <= samples; ++k) {
        sample(grid.period * k / samples, grid, buf);
        if (std::any_of(buf.begin(), buf.end(), [](double v) { return v < 0.0; })) return false;
    }
    return true;
}

std::vector<double> TridiagonalOperator::apply(std::span<const double> f) const {
    const std::size_t n = diagonal.size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = diagonal[i] * f[i];
        if (i > 0) acc += lower[i] * f[i - 1];
        if (i + 1 < n) acc += upper[i] * f[i + 1];
        out[i] = acc;
    }
    return out;
}

TridiagonalOperator TridiagonalOperator::transposed() const {
    const std::size_t n = diagonal.size();
    TridiagonalOperator t;
    t.time = time;
    t.kind = kind;
    t.diagonal = diagonal;
    t.lower.assign(n, 0.0);
    t.upper.assign(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) t.lower[i] = upper[i - 1];
    for (std::size_t i = 0; i + 1 < n; ++i) t.upper[i] = lower[i + 1];
    return t;
}

namespace {

struct Stencil {
    double lo, di, up;
    bool upwind;
};

// Generator stencil b f' + (a/2) f'' at one node.
Stencil generator_stencil(double b, double a, double h, AdvectionScheme scheme) {
    const double diff = 0.5 * a / (h * h);
    const bool upwind = scheme == AdvectionScheme::Upwind ||
                        (scheme == AdvectionScheme::Hybrid && std::abs(b) * h > a);
    if (!upwind) {
        const double adv = 0.5 * b / h;
        return {diff - adv, -2.0 * diff, diff + adv, false};
    }
    if (b > 0.0) return {diff, -2.0 * diff - b / h, diff + b / h, true};
    return {diff - b / h, -2.0 * diff + b / h, diff, true};
}

// Fills generator rows of L(t) into `out` (sized n_x).
void assemble_rows(const PeriodicSde1D& sde, double t, const SpaceTimeGrid& grid, TridiagonalOperator& out,
                   int* upwind_count = nullptr) {
    const int n = grid.n_x;
    const double h = grid.h();
    out.lower.resize(n);
    out.diagonal.resize(n);
    out.upper.resize(n);
    int upwinded = 0;
    for (int i = 0; i < n; ++i) {
        const double x = grid.x(i);
        const double sig = sde.sigma(t, x);
        const double a = sig * sig;
        if (!(a > 0.0) || !std::isfinite(a))
            throw Error(ErrorCode::EllipticityViolated, "discretize.assemble_generator",
                        "a(s,x) = " + std::to_string(a) + " at x = " + std::to_string(x));
        const Stencil st = generator_stencil(sde.b(t, x), a, h, grid.advection);
        out.lower[i] = st.lo;
        out.diagonal[i] = st.di;
        out.upper[i] = st.up;
        upwinded += st.upwind ? 1 : 0;
    }
    out.lower[0] = 0.0;
    out.upper[n - 1] = 0.0;
    if (upwind_count) *upwind_count = upwinded;
}

// The adjoint row i collects the generator weights that node x_i receives from
// its neighbours, i.e. the conservative (divergence-form) stencil of L*.
void adjoint_in_place(TridiagonalOperator& op) {
    const std::size_t n = op.diagonal.size();
    // new_lower[i] = upper[i-1], new_upper[i] = lower[i+1]
    double carry = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double up_prev = carry;
        carry = op.upper[i];
        op.upper[i] = (i + 1 < n) ? op.lower[i + 1] : 0.0;
        op.lower[i] = (i > 0) ? up_prev : 0.0;
    }
}

double coefficient_time(OperatorKind kind, double s, double period) {
    return kind == OperatorKind::Reversed ? period - s : s;
}

void assemble_kind(const PeriodicSde1D& sde, double s, const SpaceTimeGrid& grid, OperatorKind kind,
                   TridiagonalOperator& out) {
    assemble_rows(sde, coefficient_time(kind, s, grid.period), grid, out);
    if (kind == OperatorKind::Adjoint) adjoint_in_place(out);
    out.time = s;
    out.kind = kind;
}

}  // namespace

TridiagonalOperator assemble_generator(const PeriodicSde1D& sde, double s, const SpaceTimeGrid& grid,
                                       OperatorKind kind) {
    TridiagonalOperator op;
    assemble_kind(sde, s, grid, kind, op);
    return op;
}

GridAdvisory grid_advisory(const PeriodicSde1D& sde, const SpaceTimeGrid& grid, int time_samples) {
    GridAdvisory adv;
    const double h = grid.h();
    TridiagonalOperator scratch;
    for (int k = 0; k < time_samples; ++k) {
        const double t = grid.period * k / time_samples;
        double max_b = 0.0;
        for (int i = 0; i < grid.n_x; ++i) {
            const double x = grid.x(i);
            const double b = std::abs(sde.b(t, x));
            const double sig = sde.sigma(t, x);
            max_b = std::max(max_b, b);
            adv.max_cell_peclet = std::max(adv.max_cell_peclet, b * h / (sig * sig));
        }
        adv.cfl = std::max(adv.cfl, grid.dt() * max_b / h);
        int upwinded = 0;
        assemble_rows(sde, t, grid, scratch, &upwinded);
        adv.upwind_nodes = std::max(adv.upwind_nodes, upwinded);
    }
    return adv;
}

BackwardEulerStepper::BackwardEulerStepper(const PeriodicSde1D& sde, const SpaceTimeGrid& grid,
                                           OperatorKind kind)
    : sde_(sde),
      grid_(grid),
      kind_(kind),
      pivot_inv_(grid.n_x),
      upper_mod_(grid.n_x),
      sub_(grid.n_x),
      source_(grid.n_x) {}

void BackwardEulerStepper::factor(double s_next) {
    assemble_kind(sde_, s_next, grid_, kind_, op_);
    const int n = grid_.n_x;
    const double dt = grid_.dt();
    double prev_c = 0.0;
    for (int i = 0; i < n; ++i) {
        const double sub = (i > 0) ? -dt * op_.lower[i] : 0.0;
        const double main = 1.0 - dt * op_.diagonal[i];
        const double sup = (i + 1 < n) ? -dt * op_.upper[i] : 0.0;
        const double pivot = main - sub * prev_c;
        if (!(std::abs(pivot) > 1e-300) || !std::isfinite(pivot))
            throw Error(ErrorCode::SingularSystem, "discretize.step_backward_euler",
                        "pivot underflow at row " + std::to_string(i));
        pivot_inv_[i] = 1.0 / pivot;
        sub_[i] = sub;
        prev_c = sup * pivot_inv_[i];
        upper_mod_[i] = prev_c;
    }
}

void BackwardEulerStepper::solve(std::span<double> rhs) const {
    const int n = grid_.n_x;
    rhs[0] *= pivot_inv_[0];
    for (int i = 1; i < n; ++i) rhs[i] = (rhs[i] - sub_[i] * rhs[i - 1]) * pivot_inv_[i];
    for (int i = n - 2; i >= 0; --i) rhs[i] -= upper_mod_[i] * rhs[i + 1];
}

void BackwardEulerStepper::step(std::span<double> v, double s_next, const Source& f) {
    factor(s_next);
    if (!f.is_zero()) {
        f.sample(s_next, grid_, source_);
        const double dt = grid_.dt();
        for (int i = 0; i < grid_.n_x; ++i) v[i] += dt * source_[i];
    }
    solve(v);
}

namespace {

void require_size(const Field& f, const SpaceTimeGrid& grid, const char* op) {
    if (f.size() != static_cast<std::size_t>(grid.n_x))
        throw Error(ErrorCode::InvalidArgument, op,
                    "field has " + std::to_string(f.size()) + " values, grid has " + std::to_string(grid.n_x));
}

}  // namespace

int lattice_index(const SpaceTimeGrid& grid, double s, const char* op) {
    const double pos = s / grid.dt();
    const double idx = std::round(pos);
    if (std::abs(pos - idx) > 1e-8 * std::max(1.0, std::abs(pos)) || idx < 0 || idx > grid.n_t)
        throw Error(ErrorCode::OffLattice, op, "time " + std::to_string(s) + " is not on the time lattice");
    return static_cast<int>(idx);
}

Field step_backward_euler(const Field& field, double s_next, OperatorKind kind, const Source& f,
                          const SpaceTimeGrid& grid, const PeriodicSde1D& sde) {
    require_size(field, grid, "discretize.step_backward_euler");
    BackwardEulerStepper stepper(sde, grid, kind);
    Field out = field;
    stepper.step(out.values, s_next, f);
    out.time = s_next;
    return out;
}

Field evolve_phi(const Field& initial, double r, double s, const PeriodicSde1D& sde, const SpaceTimeGrid& grid) {
    const char* op = "discretize.evolve_phi";
    require_size(initial, grid, op);
    const int n0 = lattice_index(grid, r, op);
    const int n1 = lattice_index(grid, s, op);
    if (n0 > n1) throw Error(ErrorCode::InvalidArgument, op, "requires r <= s");
    Field out = initial;
    BackwardEulerStepper stepper(sde, grid, OperatorKind::Reversed);
    const Source zero = Source::zero();
    for (int n = n0; n < n1; ++n) stepper.step(out.values, grid.t(n + 1), zero);
    out.time = grid.t(n1);
    return out;
}

Field apply_period_operator(const Field& phi, const Source& f, const PeriodicSde1D& sde, const SpaceTimeGrid& grid,
                            std::vector<Field>* slices) {
    require_size(phi, grid, "discretize.apply_period_operator");
    Field out = phi;
    out.time = 0.0;
    if (slices) {
        slices->resize(grid.n_t + 1);
        (*slices)[0] = out;
    }
    BackwardEulerStepper stepper(sde, grid, OperatorKind::Reversed);
    for (int n = 0; n < grid.n_t; ++n) {
        stepper.step(out.values, grid.t(n + 1), f);
        if (slices) {
            auto& slot = (*slices)[n + 1];
            slot.values.assign(out.values.begin(), out.values.end());
            slot.time = grid.t(n + 1);
        }
    }
    out.time = 0.0;
    return out;
}

Field evolve_w(const Field& w0, double s, const PeriodicSde1D& sde, const SpaceTimeGrid& grid) {
    const char* op = "discretize.evolve_w";
    require_size(w0, grid, op);
    const int n1 = lattice_index(grid, s, op);
    Field out = w0;
    BackwardEulerStepper stepper(sde, grid, OperatorKind::Adjoint);
    const Source zero = Source::zero();
    // Step n uses the coefficients at t(n): this makes W(0,T) the exact
    // transpose of the Phi(0,T) sweep.
    for (int n = 0; n < n1; ++n) stepper.step(out.values, grid.t(n), zero);
    out.time = grid.t(n1);
    return out;
}

SurvivalResult survival_duration(const PeriodicSde1D& sde, const SpaceTimeGrid& grid, double s, int x_index,
                                 double tail_tol, int max_periods) {
    const char* op = "discretize.survival_duration";
    if (x_index < 0 || x_index >= grid.n_x) throw Error(ErrorCode::InvalidArgument, op, "x_index not interior");
    if (!(tail_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, op, "tail_tol must be positive");

    const double h = grid.h();
    const double dt = grid.dt();
    std::vector<double> w(grid.n_x, 0.0);
    w[x_index] = 1.0 / h;

    SurvivalResult result;
    result.dt = dt;
    auto mass = [&] { return h * std::accumulate(w.begin(), w.end(), 0.0); };
    double G = mass();
    result.survival.push_back(G);

    BackwardEulerStepper stepper(sde, grid, OperatorKind::Adjoint);
    const Source zero = Source::zero();
    const long max_steps = static_cast<long>(max_periods) * grid.n_t;
    double integral = 0.0;
    for (long k = 0; k < max_steps; ++k) {
        // Same time level as evolve_w; the coefficients are T-periodic.
        stepper.step(w, s + k * dt, zero);
        const double G_next = mass();
        integral += 0.5 * dt * (G + G_next);
        G = G_next;
        result.survival.push_back(G);
        if (G < tail_tol) {
            result.duration = integral;
            return result;
        }
    }
    throw Error(ErrorCode::NoDecay, op,
                "survival probability " + std::to_string(G) + " still above tail_tol after " +
                    std::to_string(max_periods) + " periods");
}

double inner(std::span<const double> u, std::span<const double> v, double h) {
    return h * std::inner_product(u.begin(), u.end(), v.begin(), 0.0);
}

double l2_norm(std::span<const double> u, double h) { return std::sqrt(inner(u, u, h)); }

}  // namespace exittime
