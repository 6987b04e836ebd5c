#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "exittime/periodic.hpp"
#include "exittime/resonance.hpp"
#include "exittime/simulate.hpp"

namespace exittime {

inline constexpr const char* version = "0.1.0";

enum class RunMode { Mc, Pde, Compare, Resonance, Survival };

RunMode parse_run_mode(const std::string& name);
const char* to_string(RunMode mode);

struct DomainSpec {
    double left = -1.0;
    double right = 3.0;  // either end may be infinite
    bool truncate = false;
    double lambda = 1.0;
    double safety = 2.0;
};

struct SurvivalSpec {
    std::vector<double> points{0.5, 1.0, 2.0};
    double tail_tol = 1e-8;
    int max_periods = 50;
};

struct ResonanceSpec {
    double sweep_lo = 0.245;
    double sweep_hi = 0.25;
    int sweep_points = 11;
    bool find = true;
    double bracket_lo = 0.245;
    double bracket_hi = 0.25;
    double tol_sigma = 5e-4;
    std::optional<double> target;  // defaults to T/2
    double x_eval = 1.0;
};

struct RunConfig {
    RunMode mode = RunMode::Pde;
    std::string family = "duffing";
    std::map<std::string, double> params;
    DomainSpec domain;
    int n_x = 500;
    int n_t = 0;  // 0 selects floor(2T)
    AdvectionScheme advection = AdvectionScheme::Hybrid;
    SolverMethod method = SolverMethod::Banach;
    SolverOptions solver;
    McConfig mc;
    double s = 0.0;
    // Initial states for mc and compare: explicit list, or `initial_count`
    // evenly spaced interior points.
    std::vector<double> initial_states;
    int initial_count = 20;
    SurvivalSpec survival;
    ResonanceSpec resonance;
    int threads = 1;
};

/// Parses a JSON document. Unknown keys and malformed values raise InvalidConfig.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical JSON of the full configuration (defaults filled in, keys sorted).
std::string canonical_json(const RunConfig& config);

/// FNV-1a of canonical_json, as 16 hex digits.
std::string config_hash(const RunConfig& config);

/// Checks everything that can be checked without computing. Throws InvalidConfig.
void validate(const RunConfig& config);

/// Domain after the optional truncation, and the certificate when one was made.
struct ResolvedProblem {
    PeriodicSde1D sde;
    ExitDomain domain;
    std::optional<DissipativityCertificate> certificate;
    std::vector<double> initial_states;
};

ResolvedProblem resolve(const RunConfig& config);

struct RunOutcome {
    std::vector<std::filesystem::path> files;
    std::string summary_json;
};

/// Validates, computes, then writes the artifacts of the selected mode into
/// out_dir. Nothing is written if validation fails.
RunOutcome run(const RunConfig& config, const std::filesystem::path& out_dir);

/// Thread count from EXITTIME_THREADS, or 1.
int default_threads();

}  // namespace exittime
