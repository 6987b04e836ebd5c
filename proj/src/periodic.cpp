#include "exittime/periodic.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace exittime {

SolverMethod parse_solver_method(const std::string& name) {
    if (name == "banach") return SolverMethod::Banach;
    if (name == "grad" || name == "gradient") return SolverMethod::Gradient;
    if (name == "direct") return SolverMethod::Direct;
    throw Error(ErrorCode::InvalidConfig, "periodic.parse_solver_method", "unknown method '" + name + "'");
}

const char* to_string(SolverMethod method) {
    switch (method) {
        case SolverMethod::Banach: return "banach";
        case SolverMethod::Gradient: return "grad";
        case SolverMethod::Direct: return "direct";
    }
    return "unknown";
}

namespace {

std::vector<double> residual(const Field& image, const Field& phi) {
    std::vector<double> r(phi.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = image.values[i] - phi.values[i];
    return r;
}

double half_sq(std::span<const double> r, double h) { return 0.5 * inner(r, r, h); }

void validate(const SolverOptions& o, const char* op) {
    if (!(o.tol_F > 0.0)) throw Error(ErrorCode::InvalidArgument, op, "tol_F must be positive");
    if (o.max_iter < 1) throw Error(ErrorCode::InvalidArgument, op, "max_iter must be >= 1");
}

PeriodicSolution make_solution(std::vector<Field> slices, const char* name, int iterations, double cost) {
    PeriodicSolution sol;
    sol.slices = std::move(slices);
    sol.solver = name;
    sol.iterations = iterations;
    sol.final_cost = cost;
    return sol;
}

}  // namespace

double cost_F(const Field& phi, const Source& f, const PeriodicSde1D& sde, const SpaceTimeGrid& grid) {
    const Field image = apply_period_operator(phi, f, sde, grid);
    return half_sq(residual(image, phi), grid.h());
}

Field gradient_F(const Field& phi, const Source& f, const PeriodicSde1D& sde, const SpaceTimeGrid& grid) {
    const Field image = apply_period_operator(phi, f, sde, grid);
    Field w0(residual(image, phi), 0.0);
    Field wT = evolve_w(w0, grid.period, sde, grid);
    for (std::size_t i = 0; i < wT.size(); ++i) wT.values[i] -= w0.values[i];
    wT.time = 0.0;
    return wT;
}

SolveResult solve_banach(const Source& f, const PeriodicSde1D& sde, const SpaceTimeGrid& grid,
                         const SolverOptions& options) {
    const char* op = "periodic.solve_banach";
    validate(options, op);
    const double h = grid.h();

    SolveResult out;
    SolverReport& rep = out.report;
    rep.tolerance_used = options.tol_F;

    Field v(grid.n_x, 0.0);
    std::vector<Field> slices;
    for (int k = 0; k < options.max_iter; ++k) {
        Field image = apply_period_operator(v, f, sde, grid, &slices);
        ++rep.period_sweeps;
        const double F = half_sq(residual(image, v), h);
        if (!std::isfinite(F)) throw Error(ErrorCode::NonFinite, op, "cost became non-finite");
        if (!rep.cost_history.empty() && rep.cost_history.back() > 0.0)
            rep.contraction_estimates.push_back(std::sqrt(F / rep.cost_history.back()));
        rep.cost_history.push_back(F);
        rep.iterations = k + 1;
        if (F <= options.tol_F) {
            rep.converged = true;
            out.solution = make_solution(std::move(slices), "banach", rep.iterations, F);
            return out;
        }
        v = std::move(image);
    }
    throw NotConverged(op,
                       "F = " + std::to_string(rep.cost_history.back()) + " after " +
                           std::to_string(options.max_iter) + " iterations; contraction factor is close to 1, "
                           "consider the direct solver",
                       rep);
}

SolveResult solve_gradient(const Source& f, const PeriodicSde1D& sde, const SpaceTimeGrid& grid,
                           const SolverOptions& options) {
    const char* op = "periodic.solve_gradient";
    validate(options, op);
    const double h = grid.h();
    const bool project = f.nonnegative_on(grid);

    SolveResult out;
    SolverReport& rep = out.report;
    rep.tolerance_used = options.tol_F;

    Field v(grid.n_x, 0.0);
    Field image = apply_period_operator(v, f, sde, grid);
    ++rep.period_sweeps;
    std::vector<double> r = residual(image, v);
    double F = half_sq(r, h);
    rep.cost_history.push_back(F);

    double gamma = options.initial_step;
    Field trial(grid.n_x, 0.0);
    int iter = 0;
    while (F > options.tol_F) {
        if (iter >= options.max_iter)
            throw NotConverged(op,
                               "F = " + std::to_string(F) + " after " + std::to_string(options.max_iter) +
                                   " iterations",
                               rep);
        // Adjoint state: gradient = W(0,T) r - r.
        Field w = evolve_w(Field(r, 0.0), grid.period, sde, grid);
        ++rep.period_sweeps;
        std::vector<double> g(grid.n_x);
        for (int i = 0; i < grid.n_x; ++i) g[i] = w.values[i] - r[i];

        while (true) {
            for (int i = 0; i < grid.n_x; ++i) {
                const double value = v.values[i] - gamma * g[i];
                trial.values[i] = project ? std::max(value, 0.0) : value;
            }
            Field trial_image = apply_period_operator(trial, f, sde, grid);
            ++rep.period_sweeps;
            std::vector<double> trial_r = residual(trial_image, trial);
            const double trial_F = half_sq(trial_r, h);
            if (std::isfinite(trial_F) && trial_F < F) {
                rep.contraction_estimates.push_back(std::sqrt(trial_F / F));
                rep.step_sizes.push_back(gamma);
                std::swap(v.values, trial.values);
                r = std::move(trial_r);
                F = trial_F;
                rep.cost_history.push_back(F);
                gamma *= options.step_growth;
                break;
            }
            gamma *= options.step_shrink;
            if (gamma < options.min_step)
                throw Error(ErrorCode::StepCollapse, op,
                            "step size fell below " + std::to_string(options.min_step) + " without descent (F = " +
                                std::to_string(F) + ")");
        }
        ++iter;
    }
    rep.iterations = iter;
    rep.converged = true;

    std::vector<Field> slices;
    apply_period_operator(v, f, sde, grid, &slices);
    ++rep.period_sweeps;
    out.solution = make_solution(std::move(slices), "grad", iter, F);
    return out;
}

std::vector<double> dense_period_matrix(const PeriodicSde1D& sde, const SpaceTimeGrid& grid) {
    const int n = grid.n_x;
    std::vector<double> m(static_cast<std::size_t>(n) * n, 0.0);
    for (int j = 0; j < n; ++j) m[static_cast<std::size_t>(j) * n + j] = 1.0;
    BackwardEulerStepper stepper(sde, grid, OperatorKind::Reversed);
    for (int step = 0; step < grid.n_t; ++step) {
        stepper.factor(grid.t(step + 1));
        for (int j = 0; j < n; ++j) stepper.solve(std::span<double>(m.data() + static_cast<std::size_t>(j) * n, n));
    }
    return m;
}

SolveResult solve_direct(const Source& f, const PeriodicSde1D& sde, const SpaceTimeGrid& grid,
                         const SolverOptions& options) {
    const char* op = "periodic.solve_direct";
    if (grid.n_x > 2000) throw Error(ErrorCode::InvalidArgument, op, "n_x > 2000 is too large for a dense solve");
    const int n = grid.n_x;

    SolveResult out;
    SolverReport& rep = out.report;
    rep.tolerance_used = options.tol_F;

    const std::vector<double> phi = dense_period_matrix(sde, grid);
    rep.period_sweeps += 1;
    const Eigen::Map<const Eigen::MatrixXd> Phi(phi.data(), n, n);

    const Field duhamel = apply_period_operator(Field(n, 0.0), f, sde, grid);
    rep.period_sweeps += 1;

    const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) - Phi;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
    // ||(I - Phi)^-1|| (1 + ||Phi||) in the 1-norm: unlike cond(I - Phi) this
    // sees the cancellation in forming I - Phi when Phi is close to I.
    const double rcond = lu.rcond();
    const double norm_sys = system.cwiseAbs().colwise().sum().maxCoeff();
    const double norm_phi = Phi.cwiseAbs().colwise().sum().maxCoeff();
    rep.condition_estimate = rcond > 0.0 && norm_sys > 0.0 ? (1.0 + norm_phi) / (rcond * norm_sys)
                                                           : std::numeric_limits<double>::infinity();
    if (!(rep.condition_estimate <= 1e12))
        throw Error(ErrorCode::IllConditioned, op,
                    "condition estimate " + std::to_string(rep.condition_estimate) +
                        " exceeds 1e12; spectral radius of Phi(0,T) is too close to 1");
    rep.spectral_radius = Eigen::EigenSolver<Eigen::MatrixXd>(Phi, false).eigenvalues().cwiseAbs().maxCoeff();

    const Eigen::Map<const Eigen::VectorXd> rhs(duhamel.values.data(), n);
    const Eigen::VectorXd v0 = lu.solve(rhs);

    Field start(std::vector<double>(v0.data(), v0.data() + n), 0.0);
    std::vector<Field> slices;
    const Field image = apply_period_operator(start, f, sde, grid, &slices);
    rep.period_sweeps += 1;
    const double F = half_sq(residual(image, start), grid.h());
    rep.cost_history.push_back(F);
    rep.iterations = 1;
    rep.converged = true;
    out.solution = make_solution(std::move(slices), "direct", 1, F);
    return out;
}

SolveResult solve_periodic(SolverMethod method, const Source& f, const PeriodicSde1D& sde,
                           const SpaceTimeGrid& grid, const SolverOptions& options) {
    switch (method) {
        case SolverMethod::Banach: return solve_banach(f, sde, grid, options);
        case SolverMethod::Gradient: return solve_gradient(f, sde, grid, options);
        case SolverMethod::Direct: return solve_direct(f, sde, grid, options);
    }
    throw Error(ErrorCode::InvalidArgument, "periodic.solve_periodic", "unknown method");
}

namespace {

// Differences over the n+1 cells of the zero-extended field.
std::vector<double> cell_slopes(const Field& phi, double h) {
    const std::size_t n = phi.size();
    std::vector<double> d(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
        const double left = j == 0 ? 0.0 : phi.values[j - 1];
        const double right = j == n ? 0.0 : phi.values[j];
        d[j] = (right - left) / h;
    }
    return d;
}

}  // namespace

double bilinear_form(const Field& phi, const Field& psi, double s, const PeriodicSde1D& sde,
                     const SpaceTimeGrid& grid) {
    const int n = grid.n_x;
    const double h = grid.h();
    const double t = grid.period - s;
    auto a_at = [&](double x) {
        const double sig = sde.sigma(t, x);
        return sig * sig;
    };

    double advective = 0.0;
    const double dx = 1e-6 * std::max(1.0, grid.b - grid.a);
    for (int i = 0; i < n; ++i) {
        const double x = grid.x(i);
        const double da = sde.additive_sigma ? 0.0 : (a_at(x + dx) - a_at(x - dx)) / (2.0 * dx);
        const double b_tilde = sde.b(t, x) + da;
        const double left = i == 0 ? 0.0 : phi.values[i - 1];
        const double right = i == n - 1 ? 0.0 : phi.values[i + 1];
        advective += b_tilde * (right - left) / (2.0 * h) * psi.values[i];
    }
    advective *= -h;

    const std::vector<double> dphi = cell_slopes(phi, h);
    const std::vector<double> dpsi = cell_slopes(psi, h);
    double diffusive = 0.0;
    for (int j = 0; j <= n; ++j) diffusive += a_at(grid.a + (j + 0.5) * h) * dphi[j] * dpsi[j];
    diffusive *= 0.5 * h;
    return advective + diffusive;
}

double h1_norm_squared(const Field& phi, const SpaceTimeGrid& grid) {
    const double h = grid.h();
    const std::vector<double> d = cell_slopes(phi, h);
    return inner(phi.values, phi.values, h) + inner(d, d, h);
}

CoercivityEstimate coercivity_probe(const PeriodicSde1D& sde, const SpaceTimeGrid& grid, int n_samples,
                                    std::uint64_t seed) {
    if (n_samples < 1)
        throw Error(ErrorCode::InvalidArgument, "periodic.coercivity_probe", "n_samples must be >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    const int modes = std::min(grid.n_x, 32);
    const double length = grid.b - grid.a;

    // Sample 0 is the lowest Dirichlet mode, which attains the Poincare bound.
    std::vector<Field> samples;
    for (int k = 0; k < n_samples; ++k) {
        Field phi(grid.n_x, 0.0);
        for (int m = 1; m <= modes; ++m) {
            const double c = k == 0 ? (m == 1 ? 1.0 : 0.0) : normal(rng) / m;
            for (int i = 0; i < grid.n_x; ++i)
                phi.values[i] += c * std::sin(m * std::numbers::pi * (grid.x(i) - grid.a) / length);
        }
        const double norm = std::sqrt(h1_norm_squared(phi, grid));
        for (double& value : phi.values) value /= norm;
        samples.push_back(std::move(phi));
    }

    CoercivityEstimate est{std::numeric_limits<double>::infinity(), 0.0};
    const int times = std::min(grid.n_t, 16);
    for (int k = 0; k < times; ++k) {
        const double s = grid.period * k / times;
        for (const Field& phi : samples) {
            const double value = bilinear_form(phi, phi, s, sde, grid);
            if (value < est.alpha_hat) est = {value, s};
        }
    }
    return est;
}

double poincare_constant(double length) {
    const double r = length / std::numbers::pi;
    return r * r;
}

double brownian_coercivity_constant(double sigma, double length) {
    const double s2 = sigma * sigma;
    return std::min(s2 / 4.0, s2 / (4.0 * poincare_constant(length)));
}

PeriodicSolution to_expected_duration(const PeriodicSolution& v) {
    PeriodicSolution out = v;
    const std::size_t n = v.slices.size();
    for (std::size_t k = 0; k < n; ++k) {
        out.slices[k].values = v.slices[n - 1 - k].values;
        out.slices[k].time = v.slices[k].time;
    }
    out.expected_duration = !v.expected_duration;
    return out;
}

double verify_pde_residual(const PeriodicSolution& tau, const PeriodicSde1D& sde, const SpaceTimeGrid& grid) {
    const int n_t = static_cast<int>(tau.slices.size()) - 1;
    if (n_t != grid.n_t)
        throw Error(ErrorCode::InvalidArgument, "periodic.verify_pde_residual", "slice count does not match grid");
    const double dt = grid.dt();
    double worst = 0.0;
    for (int n = 1; n < n_t; ++n) {
        const auto& prev = tau.slices[n - 1].values;
        const auto& next = tau.slices[n + 1].values;
        const auto& cur = tau.slices[n].values;
        const std::vector<double> Lu =
            assemble_generator(sde, grid.t(n), grid, OperatorKind::Generator).apply(cur);
        for (int i = 0; i < grid.n_x; ++i) {
            const double ds = (next[i] - prev[i]) / (2.0 * dt);
            worst = std::max(worst, std::abs(ds + Lu[i] + 1.0));
        }
    }
    return worst;
}

double interpolate(const Field& field, const SpaceTimeGrid& grid, double x) {
    if (!(x >= grid.a && x <= grid.b))
        throw Error(ErrorCode::InvalidArgument, "periodic.interpolate", "x outside the grid");
    const double h = grid.h();
    const double pos = (x - grid.a) / h;  // extended index, boundaries at 0 and n_x + 1
    const int k = std::min(static_cast<int>(std::floor(pos)), grid.n_x);
    const double w = pos - k;
    auto value = [&](int ext) { return (ext <= 0 || ext > grid.n_x) ? 0.0 : field.values[ext - 1]; };
    return (1.0 - w) * value(k) + w * value(k + 1);
}

double relative_l2(std::span<const double> u, std::span<const double> v) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        num += (u[i] - v[i]) * (u[i] - v[i]);
        den += v[i] * v[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace exittime
