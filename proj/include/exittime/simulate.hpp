#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "exittime/model.hpp"

namespace exittime {

struct McConfig {
    double dt = 5e-3;
    int n_paths = 1000;
    std::uint64_t seed = 0;
    double max_duration = 20.0;  // horizon in periods; at least 10
    int threads = 1;

    void validate() const;
};

struct ExitStatistics {
    double initial_state = 0.0;
    double initial_time = 0.0;
    double mean = 0.0;
    double std_error = 0.0;
    int n_samples = 0;
    int n_censored = 0;

    double censored_fraction() const { return n_samples > 0 ? double(n_censored) / n_samples : 0.0; }
};

/// Generator for path `path` of initial point `point`. Independent of the order
/// in which paths are simulated, so the same (seed, point, path) always
/// reproduces the same noise.
std::mt19937_64 path_stream(std::uint64_t seed, std::uint64_t point, std::uint64_t path);

/// One Euler-Maruyama exit duration from (s, x). Exit is the first discrete
/// step outside the closed interval. Returns nullopt when the path is still
/// inside after max_duration periods.
std::optional<double> simulate_exit_duration(const PeriodicSde1D& sde, const ExitDomain& domain, double s,
                                             double x, const McConfig& cfg, std::mt19937_64& rng);

/// Monte Carlo mean exit duration at each initial state. Censored paths are
/// left out of the mean and counted.
std::vector<ExitStatistics> estimate_expected_exit_curve(const PeriodicSde1D& sde, const ExitDomain& domain,
                                                         double s, std::span<const double> initial_grid,
                                                         const McConfig& cfg);

struct EpsilonEstimate {
    double epsilon = 0.0;    // max over probes of P(stay in D over one period)
    double std_error = 0.0;  // binomial standard error at the maximizing probe
    double worst_state = 0.0;
    bool near_one = false;   // epsilon > 0.999
};

EpsilonEstimate estimate_epsilon(const PeriodicSde1D& sde, const ExitDomain& domain, double s,
                                 const McConfig& cfg, int n_probes = 16);

/// (T / (1 - eps)^2, T^2 (1 + eps) / (1 - eps)^3).
std::pair<double, double> moment_bounds(double epsilon, double period);

}  // namespace exittime
