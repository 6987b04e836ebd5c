#include "exittime/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "exittime/error.hpp"

namespace exittime {

namespace {

double resolve_period(double omega, std::optional<double> period, const char* op) {
    if (period) {
        if (!(*period > 0.0)) throw Error(ErrorCode::InvalidArgument, op, "period must be positive");
        return *period;
    }
    if (omega == 0.0) return 1.0;
    return 2.0 * std::numbers::pi / std::abs(omega);
}

void require_sigma(double sigma, const char* op) {
    if (!std::isfinite(sigma)) throw Error(ErrorCode::InvalidArgument, op, "sigma must be finite");
}

PeriodicSde1D additive(std::string family, CoefficientFn drift, CoefficientFn unforced,
                       double sigma, double period) {
    PeriodicSde1D sde;
    sde.family = std::move(family);
    sde.drift = std::move(drift);
    sde.diffusion = [sigma](double, double) { return sigma; };
    sde.unforced_drift = std::move(unforced);
    sde.period = period;
    sde.ellipticity = sigma * sigma;
    sde.additive_sigma = sigma;
    return sde;
}

}  // namespace

PeriodicSde1D duffing(double amplitude, double omega, double sigma, std::optional<double> period) {
    require_sigma(sigma, "model.duffing");
    const double T = resolve_period(omega, period, "model.duffing");
    return additive(
        "duffing",
        [amplitude, omega](double t, double x) { return x - x * x * x + amplitude * std::cos(omega * t); },
        [](double, double x) { return x - x * x * x; }, sigma, T);
}

PeriodicSde1D periodic_ou(double alpha, double s_mean, double s_amp, double omega, double sigma,
                          std::optional<double> period) {
    require_sigma(sigma, "model.periodic_ou");
    const double T = resolve_period(omega, period, "model.periodic_ou");
    return additive(
        "periodic_ou",
        [=](double t, double x) { return s_mean + s_amp * std::cos(omega * t) - alpha * x; },
        [=](double, double x) { return s_mean - alpha * x; }, sigma, T);
}

PeriodicSde1D brownian_periodic_drift(double s_mean, double s_amp, double omega, double sigma,
                                      std::optional<double> period) {
    require_sigma(sigma, "model.brownian_periodic_drift");
    const double T = resolve_period(omega, period, "model.brownian_periodic_drift");
    return additive(
        "brownian_periodic_drift",
        [=](double t, double) { return s_mean + s_amp * std::cos(omega * t); },
        [=](double, double) { return s_mean; }, sigma, T);
}

PeriodicSde1D polynomial_drift(std::span<const double> coeffs, double amplitude, double omega,
                               double sigma, std::optional<double> period) {
    require_sigma(sigma, "model.polynomial_drift");
    const double T = resolve_period(omega, period, "model.polynomial_drift");
    std::vector<double> c(coeffs.begin(), coeffs.end());
    auto poly = [c](double x) {
        double acc = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
        return acc;
    };
    return additive(
        "polynomial",
        [poly, amplitude, omega](double t, double x) { return poly(x) + amplitude * std::cos(omega * t); },
        [poly](double, double x) { return poly(x); }, sigma, T);
}

PeriodicSde1D make_sde(const std::string& family, const std::map<std::string, double>& params) {
    const char* op = "model.make_sde";
    auto take = [&](std::map<std::string, double> defaults) {
        for (const auto& [key, value] : params) {
            if (!defaults.contains(key))
                throw Error(ErrorCode::InvalidConfig, op,
                            "unknown parameter '" + key + "' for family '" + family + "'");
            defaults[key] = value;
        }
        return defaults;
    };
    auto period_of = [&](const std::map<std::string, double>& p) -> std::optional<double> {
        if (params.contains("period")) return p.at("period");
        return std::nullopt;
    };

    if (family == "duffing") {
        auto p = take({{"A", 0.12}, {"omega", 0.001}, {"sigma", 0.285}, {"period", 0.0}});
        return duffing(p["A"], p["omega"], p["sigma"], period_of(p));
    }
    if (family == "periodic_ou") {
        auto p = take({{"alpha", 1.0}, {"s_mean", 0.0}, {"s_amp", 1.0}, {"omega", 1.0}, {"sigma", 1.0},
                       {"period", 0.0}});
        return periodic_ou(p["alpha"], p["s_mean"], p["s_amp"], p["omega"], p["sigma"], period_of(p));
    }
    if (family == "brownian_periodic_drift") {
        auto p = take({{"s_mean", 0.0}, {"s_amp", 0.0}, {"omega", 0.0}, {"sigma", 1.0}, {"period", 0.0}});
        return brownian_periodic_drift(p["s_mean"], p["s_amp"], p["omega"], p["sigma"], period_of(p));
    }
    if (family == "polynomial") {
        std::map<std::string, double> defaults{{"A", 0.0}, {"omega", 0.0}, {"sigma", 1.0}, {"period", 0.0}};
        for (int k = 0; k < 10; ++k) defaults["c" + std::to_string(k)] = 0.0;
        auto p = take(defaults);
        std::vector<double> coeffs;
        for (int k = 0; k < 10; ++k) coeffs.push_back(p["c" + std::to_string(k)]);
        while (!coeffs.empty() && coeffs.back() == 0.0) coeffs.pop_back();
        return polynomial_drift(coeffs, p["A"], p["omega"], p["sigma"], period_of(p));
    }
    throw Error(ErrorCode::InvalidConfig, op, "unknown SDE family '" + family + "'");
}

ExitDomain::ExitDomain(double l, double r) : left(l), right(r) {
    if (std::isnan(l) || std::isnan(r) || !(l < r))
        throw Error(ErrorCode::InvalidArgument, "model.ExitDomain", "requires left < right");
}

bool ExitDomain::bounded() const { return std::isfinite(lower()) && std::isfinite(upper()); }

double ExitDomain::lower() const { return truncation_left.value_or(left); }

double ExitDomain::upper() const { return truncation_right.value_or(right); }

ExitDomain ExitDomain::truncated(double R_star, std::span<const double> initial_states) const {
    const char* op = "model.ExitDomain.truncated";
    if (!(R_star > 0.0) || !std::isfinite(R_star))
        throw Error(ErrorCode::InvalidArgument, op, "R_star must be positive and finite");
    ExitDomain out = *this;
    if (!std::isfinite(left)) {
        if (-R_star >= right) throw Error(ErrorCode::InvalidArgument, op, "-R_star lies outside the domain");
        out.truncation_left = -R_star;
    }
    if (!std::isfinite(right)) {
        if (R_star <= left) throw Error(ErrorCode::InvalidArgument, op, "R_star lies outside the domain");
        out.truncation_right = R_star;
    }
    for (double x : initial_states) {
        if (!out.contains(x))
            throw Error(ErrorCode::InvalidArgument, op,
                        "initial state " + std::to_string(x) + " outside the truncated domain");
    }
    return out;
}

PeriodicityReport check_periodicity(const PeriodicSde1D& sde, const SampleBox& box, double tol,
                                    int lattice) {
    const char* op = "model.check_periodicity";
    if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, op, "tol must be positive");
    if (!(box.t_hi >= box.t_lo) || !(box.x_hi >= box.x_lo))
        throw Error(ErrorCode::InvalidArgument, op, "empty sample box");
    lattice = std::max(lattice, 32);

    PeriodicityReport report;
    const double T = sde.period;
    for (int i = 0; i < lattice; ++i) {
        const double t = box.t_lo + (box.t_hi - box.t_lo) * i / (lattice - 1);
        for (int j = 0; j < lattice; ++j) {
            const double x = box.x_lo + (box.x_hi - box.x_lo) * j / (lattice - 1);
            report.max_drift_gap = std::max(report.max_drift_gap, std::abs(sde.b(t, x) - sde.b(t + T, x)));
            report.max_diffusion_gap =
                std::max(report.max_diffusion_gap, std::abs(sde.sigma(t, x) - sde.sigma(t + T, x)));
        }
    }
    report.periodic = report.max_drift_gap <= tol && report.max_diffusion_gap <= tol;
    return report;
}

DissipativityCoefficients dissipativity_coefficients(const PeriodicSde1D& sde, double lambda, double r0) {
    const char* op = "model.dissipativity_coefficients";
    if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, op, "lambda must be positive");
    if (!(r0 > 0.0)) throw Error(ErrorCode::InvalidArgument, op, "r0 must be positive");

    // Nested lattices with a common spacing, so each supremum bounds the previous one.
    constexpr int per_r0 = 1024;
    constexpr int n_t = 32;
    const double dx = r0 / per_r0;
    auto sup_on = [&](int half_width) {
        double sup = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < n_t; ++i) {
            const double t = sde.period * i / n_t;
            for (int k = -half_width; k <= half_width; ++k) {
                const double x = k * dx;
                sup = std::max(sup, 2.0 * x * sde.b(t, x) + lambda * x * x);
            }
        }
        return sup;
    };
    const double s1 = sup_on(per_r0);
    const double s2 = sup_on(2 * per_r0);
    const double s4 = sup_on(4 * per_r0);
    if (!std::isfinite(s1) || !std::isfinite(s2) || !std::isfinite(s4))
        throw Error(ErrorCode::NotDissipative, op, "sampled supremum is not finite");
    if (s4 > s2 + 1e-9 * std::max(1.0, std::abs(s2)))
        throw Error(ErrorCode::NotDissipative, op,
                    "sampled supremum keeps growing with the lattice radius (" + std::to_string(s2) + " -> " +
                        std::to_string(s4) + ")");
    return {std::max(s4, 0.0), lambda};
}

double duffing_dissipativity_constant(double lambda, double amplitude) {
    if (!(lambda > 0.0 && lambda < 2.0))
        throw Error(ErrorCode::InvalidArgument, "model.duffing_dissipativity_constant",
                    "lambda must lie in (0, 2)");
    return 1.0 / (2.0 - lambda) + 2.0 * std::abs(amplitude) + lambda / 4.0;
}

DissipativityCertificate truncation_radius(double c, double lambda, double sigma_sup, double r_D,
                                           double r_I, double safety) {
    const char* op = "model.truncation_radius";
    if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, op, "lambda must be positive");
    if (!(safety >= 1.0)) throw Error(ErrorCode::InvalidArgument, op, "safety must be >= 1");
    if (c < 0.0) throw Error(ErrorCode::InvalidArgument, op, "c must be nonnegative");
    DissipativityCertificate cert{};
    cert.c = c;
    cert.lambda = lambda;
    cert.r_star = std::sqrt((c + sigma_sup * sigma_sup) / lambda);
    cert.r_D = r_D;
    cert.r_I = r_I;
    cert.R_star = safety * std::max({cert.r_star, r_D, r_I});
    return cert;
}

double boundary_radius(const ExitDomain& domain) {
    double r = std::numeric_limits<double>::infinity();
    if (std::isfinite(domain.left)) r = std::min(r, std::abs(domain.left));
    if (std::isfinite(domain.right)) r = std::min(r, std::abs(domain.right));
    if (!std::isfinite(r))
        throw Error(ErrorCode::InvalidArgument, "model.boundary_radius", "domain has no finite boundary");
    return r;
}

bool is_odd_drift(const CoefficientFn& unforced_drift, double period, double tol, double x_radius,
                  int lattice) {
    const char* op = "model.is_odd_drift";
    if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, op, "tol must be positive");
    if (!unforced_drift) throw Error(ErrorCode::InvalidArgument, op, "no forcing-free drift available");
    for (int i = 0; i < lattice; ++i) {
        const double t = period * i / lattice;
        for (int j = 0; j <= lattice; ++j) {
            const double x = x_radius * j / lattice;
            if (std::abs(unforced_drift(t, -x) + unforced_drift(t, x)) > tol) return false;
        }
    }
    return true;
}

}  // namespace exittime
