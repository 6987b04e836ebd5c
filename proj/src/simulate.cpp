#include "exittime/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "exittime/error.hpp"
#include "parallel.hpp"

namespace exittime {

void McConfig::validate() const {
    const char* op = "simulate.McConfig";
    if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::InvalidArgument, op, "dt must be positive");
    if (n_paths < 1) throw Error(ErrorCode::InvalidArgument, op, "n_paths must be >= 1");
    if (!(max_duration >= 10.0))
        throw Error(ErrorCode::InvalidArgument, op, "max_duration must be at least 10 periods");
    if (threads < 1) throw Error(ErrorCode::InvalidArgument, op, "threads must be >= 1");
}

std::mt19937_64 path_stream(std::uint64_t seed, std::uint64_t point, std::uint64_t path) {
    auto split = [](std::uint64_t v) -> std::uint32_t { return static_cast<std::uint32_t>(v); };
    std::seed_seq seq{split(seed), split(seed >> 32), split(point), split(point >> 32), split(path),
                      split(path >> 32)};
    return std::mt19937_64(seq);
}

namespace {

void require_interior(const ExitDomain& domain, double x, const char* op) {
    if (!domain.bounded()) throw Error(ErrorCode::InvalidArgument, op, "domain must be bounded");
    if (!domain.contains(x))
        throw Error(ErrorCode::InvalidArgument, op, "initial state " + std::to_string(x) + " is not interior");
}

// Elapsed time at the first step outside [lo, hi], or nullopt after max_steps.
std::optional<double> run_path(const PeriodicSde1D& sde, double lo, double hi, double s, double x, double dt,
                               long max_steps, std::mt19937_64& rng, const char* op) {
    std::normal_distribution<double> normal;
    const double sqdt = std::sqrt(dt);
    const bool additive = sde.additive_sigma.has_value();
    const double noise = additive ? *sde.additive_sigma * sqdt : 0.0;
    double X = x;
    for (long k = 0; k < max_steps; ++k) {
        const double t = s + k * dt;
        const double z = normal(rng);
        const double dW = additive ? noise * z : sde.diffusion(t, X) * sqdt * z;
        X += sde.drift(t, X) * dt + dW;
        if (!std::isfinite(X))
            throw Error(ErrorCode::NonFinite, op, "path became non-finite at t = " + std::to_string(t));
        if (X <= lo || X >= hi) return (k + 1) * dt;
    }
    return std::nullopt;
}

}  // namespace

std::optional<double> simulate_exit_duration(const PeriodicSde1D& sde, const ExitDomain& domain, double s,
                                             double x, const McConfig& cfg, std::mt19937_64& rng) {
    const char* op = "simulate.simulate_exit_duration";
    cfg.validate();
    require_interior(domain, x, op);
    const long max_steps = static_cast<long>(std::ceil(cfg.max_duration * sde.period / cfg.dt));
    return run_path(sde, domain.lower(), domain.upper(), s, x, cfg.dt, max_steps, rng, op);
}

std::vector<ExitStatistics> estimate_expected_exit_curve(const PeriodicSde1D& sde, const ExitDomain& domain,
                                                         double s, std::span<const double> initial_grid,
                                                         const McConfig& cfg) {
    const char* op = "simulate.estimate_expected_exit_curve";
    cfg.validate();
    for (double x : initial_grid) require_interior(domain, x, op);
    const long max_steps = static_cast<long>(std::ceil(cfg.max_duration * sde.period / cfg.dt));

    std::vector<ExitStatistics> out;
    out.reserve(initial_grid.size());
    std::vector<double> samples(cfg.n_paths);
    std::vector<char> censored(cfg.n_paths);
    for (std::size_t i = 0; i < initial_grid.size(); ++i) {
        const double x = initial_grid[i];
        detail::parallel_for(cfg.n_paths, cfg.threads, [&](int j) {
            auto rng = path_stream(cfg.seed, i, j);
            auto d = run_path(sde, domain.lower(), domain.upper(), s, x, cfg.dt, max_steps, rng, op);
            censored[j] = !d;
            samples[j] = d.value_or(0.0);
        });

        ExitStatistics st;
        st.initial_state = x;
        st.initial_time = s;
        st.n_samples = cfg.n_paths;
        double sum = 0.0;
        int kept = 0;
        for (int j = 0; j < cfg.n_paths; ++j) {
            if (censored[j]) {
                ++st.n_censored;
                continue;
            }
            sum += samples[j];
            ++kept;
        }
        if (kept > 0) {
            st.mean = sum / kept;
            double ss = 0.0;
            for (int j = 0; j < cfg.n_paths; ++j)
                if (!censored[j]) ss += (samples[j] - st.mean) * (samples[j] - st.mean);
            st.std_error = kept > 1 ? std::sqrt(ss / (kept - 1) / kept) : 0.0;
        }
        out.push_back(st);
    }
    return out;
}

EpsilonEstimate estimate_epsilon(const PeriodicSde1D& sde, const ExitDomain& domain, double s,
                                 const McConfig& cfg, int n_probes) {
    const char* op = "simulate.estimate_epsilon";
    cfg.validate();
    if (!domain.bounded()) throw Error(ErrorCode::InvalidArgument, op, "domain must be bounded");
    if (n_probes < 1) throw Error(ErrorCode::InvalidArgument, op, "n_probes must be >= 1");
    const long steps = static_cast<long>(std::ceil(sde.period / cfg.dt));

    EpsilonEstimate est;
    est.epsilon = -1.0;
    std::vector<char> stayed(cfg.n_paths);
    for (int p = 0; p < n_probes; ++p) {
        const double x = domain.lower() + domain.length() * (p + 1) / (n_probes + 1);
        detail::parallel_for(cfg.n_paths, cfg.threads, [&](int j) {
            auto rng = path_stream(cfg.seed, p, j);
            stayed[j] = !run_path(sde, domain.lower(), domain.upper(), s, x, cfg.dt, steps, rng, op);
        });
        const double prob = double(std::count(stayed.begin(), stayed.end(), 1)) / cfg.n_paths;
        if (prob > est.epsilon) {
            est.epsilon = prob;
            est.worst_state = x;
            est.std_error = std::sqrt(prob * (1.0 - prob) / cfg.n_paths);
        }
    }
    est.near_one = est.epsilon > 0.999;
    return est;
}

std::pair<double, double> moment_bounds(double epsilon, double period) {
    if (!(epsilon >= 0.0 && epsilon < 1.0))
        throw Error(ErrorCode::DomainError, "simulate.moment_bounds", "epsilon must lie in [0, 1)");
    const double q = 1.0 - epsilon;
    return {period / (q * q), period * period * (1.0 + epsilon) / (q * q * q)};
}

}  // namespace exittime
