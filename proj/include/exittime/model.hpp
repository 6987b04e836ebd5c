#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>

namespace exittime {

/// Coefficient of a one-dimensional SDE as a function of (time, state).
using CoefficientFn = std::function<double(double, double)>;

/// dX_t = drift(t, X_t) dt + diffusion(t, X_t) dW_t with T-periodic coefficients.
struct PeriodicSde1D {
    std::string family;
    CoefficientFn drift;
    CoefficientFn diffusion;
    double period = 0.0;
    // Drift with the periodic forcing switched off (A = 0); empty when the
    // family has no natural notion of forcing.
    CoefficientFn unforced_drift;
    // Declared lower bound on diffusion^2 over the computational domain.
    double ellipticity = 0.0;
    // Set when the noise is additive, so callers can skip diffusion calls.
    std::optional<double> additive_sigma;

    double b(double t, double x) const { return drift(t, x); }
    double sigma(double t, double x) const {
        return additive_sigma ? *additive_sigma : diffusion(t, x);
    }
};

/// Overdamped Duffing oscillator: drift x - x^3 + A cos(omega t), constant sigma.
/// The period is 2 pi / omega; omega = 0 requires an explicit period.
PeriodicSde1D duffing(double amplitude, double omega, double sigma,
                      std::optional<double> period = std::nullopt);

/// Periodically forced Ornstein-Uhlenbeck: drift S(t) - alpha x with
/// S(t) = s_mean + s_amp cos(omega t).
PeriodicSde1D periodic_ou(double alpha, double s_mean, double s_amp, double omega,
                          double sigma, std::optional<double> period = std::nullopt);

/// Brownian motion with periodic drift S(t) = s_mean + s_amp cos(omega t).
PeriodicSde1D brownian_periodic_drift(double s_mean, double s_amp, double omega,
                                      double sigma,
                                      std::optional<double> period = std::nullopt);

/// Drift sum_k coeffs[k] x^k + A cos(omega t).
PeriodicSde1D polynomial_drift(std::span<const double> coeffs, double amplitude,
                               double omega, double sigma,
                               std::optional<double> period = std::nullopt);

/// Builds one of the named families ("duffing", "periodic_ou",
/// "brownian_periodic_drift", "polynomial") from a parameter map. Polynomial
/// coefficients are given as keys c0, c1, ... Unknown keys are rejected.
PeriodicSde1D make_sde(const std::string& family,
                       const std::map<std::string, double>& params);

/// Open interval (left, right); either end may be infinite until truncated.
struct ExitDomain {
    double left = 0.0;
    double right = 1.0;
    std::optional<double> truncation_left;
    std::optional<double> truncation_right;

    ExitDomain() = default;
    ExitDomain(double l, double r);

    bool bounded() const;
    double lower() const;  // after truncation
    double upper() const;
    bool contains(double x) const { return x > lower() && x < upper(); }
    double length() const { return upper() - lower(); }

    /// Replaces every infinite endpoint by -R_star / +R_star.
    ExitDomain truncated(double R_star, std::span<const double> initial_states) const;
};

struct SampleBox {
    double t_lo, t_hi;
    double x_lo, x_hi;
};

struct PeriodicityReport {
    bool periodic = false;
    double max_drift_gap = 0.0;
    double max_diffusion_gap = 0.0;
};

PeriodicityReport check_periodicity(const PeriodicSde1D& sde, const SampleBox& box,
                                    double tol, int lattice = 32);

struct DissipativityCoefficients {
    double c;
    double lambda;
};

/// Samples c = sup [2 x b(t,x) + lambda x^2] on lattices of radius
/// r0, 2 r0, 4 r0 and fails with NotDissipative if the supremum keeps growing.
DissipativityCoefficients dissipativity_coefficients(const PeriodicSde1D& sde,
                                                     double lambda, double r0 = 4.0);

/// Closed-form weak-dissipativity constant of the Duffing drift,
/// valid for lambda in (0, 2): 1/(2 - lambda) + 2|A| + lambda/4.
double duffing_dissipativity_constant(double lambda, double amplitude);

struct DissipativityCertificate {
    double c;
    double lambda;
    double r_star;
    double R_star;
    double r_D;
    double r_I;
};

/// r_star = sqrt((c + sigma_sup^2) / lambda), R_star = safety * max(r_star, r_D, r_I).
DissipativityCertificate truncation_radius(double c, double lambda, double sigma_sup,
                                           double r_D, double r_I, double safety = 2.0);

/// inf over the finite endpoints of |y|; throws if both endpoints are infinite.
double boundary_radius(const ExitDomain& domain);

/// True iff |b0(t,-x) + b0(t,x)| <= tol on a lattice over [0,T] x [-x_radius, x_radius].
bool is_odd_drift(const CoefficientFn& unforced_drift, double period, double tol,
                  double x_radius = 4.0, int lattice = 64);

}  // namespace exittime
