#include "exittime/run.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "exittime/error.hpp"

namespace exittime {

using nlohmann::json;

namespace {

constexpr const char* kParse = "cli.parse_config";

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::InvalidConfig, kParse, what); }

void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
    if (!j.is_object()) bad("'" + where + "' must be an object");
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, value] : j.items())
        if (!allowed.contains(key)) bad("unknown key '" + key + "' in '" + where + "'");
}

double get_real(const json& j, const std::string& key, const std::string& where) {
    if (!j.is_number()) bad("'" + where + "." + key + "' must be a number");
    return j.get<double>();
}

int get_int(const json& j, const std::string& key, const std::string& where) {
    if (!j.is_number_integer()) bad("'" + where + "." + key + "' must be an integer");
    return j.get<int>();
}

// Infinite domain ends are written as null.
double get_end(const json& j, const std::string& key, double infinity) {
    if (j.is_null()) return infinity;
    return get_real(j, key, "domain");
}

json end_to_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::vector<double> get_reals(const json& j, const std::string& where) {
    if (!j.is_array()) bad("'" + where + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) bad("'" + where + "' must be an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

AdvectionScheme parse_advection(const std::string& name) {
    if (name == "hybrid") return AdvectionScheme::Hybrid;
    if (name == "central") return AdvectionScheme::Central;
    if (name == "upwind") return AdvectionScheme::Upwind;
    bad("unknown advection scheme '" + name + "'");
}

const char* advection_name(AdvectionScheme a) {
    switch (a) {
        case AdvectionScheme::Hybrid: return "hybrid";
        case AdvectionScheme::Central: return "central";
        case AdvectionScheme::Upwind: return "upwind";
    }
    return "hybrid";
}

std::string get_string(const json& j, const std::string& where) {
    if (!j.is_string()) bad("'" + where + "' must be a string");
    return j.get<std::string>();
}

bool get_bool(const json& j, const std::string& where) {
    if (!j.is_boolean()) bad("'" + where + "' must be a boolean");
    return j.get<bool>();
}

}  // namespace

RunMode parse_run_mode(const std::string& name) {
    if (name == "mc") return RunMode::Mc;
    if (name == "pde") return RunMode::Pde;
    if (name == "compare") return RunMode::Compare;
    if (name == "resonance") return RunMode::Resonance;
    if (name == "survival") return RunMode::Survival;
    bad("unknown mode '" + name + "'");
}

const char* to_string(RunMode mode) {
    switch (mode) {
        case RunMode::Mc: return "mc";
        case RunMode::Pde: return "pde";
        case RunMode::Compare: return "compare";
        case RunMode::Resonance: return "resonance";
        case RunMode::Survival: return "survival";
    }
    return "pde";
}

RunConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        bad(std::string("malformed JSON: ") + e.what());
    }
    allow_keys(root, "config",
               {"mode", "sde", "domain", "grid", "solver", "mc", "s", "initial_states", "survival", "resonance",
                "threads"});
    RunConfig c;
    const double inf = std::numeric_limits<double>::infinity();

    if (root.contains("mode")) c.mode = parse_run_mode(get_string(root["mode"], "mode"));
    if (root.contains("sde")) {
        const json& j = root["sde"];
        allow_keys(j, "sde", {"family", "params"});
        if (j.contains("family")) c.family = get_string(j["family"], "sde.family");
        if (j.contains("params")) {
            if (!j["params"].is_object()) bad("'sde.params' must be an object");
            for (const auto& [key, value] : j["params"].items()) c.params[key] = get_real(value, key, "sde.params");
        }
    }
    if (root.contains("domain")) {
        const json& j = root["domain"];
        allow_keys(j, "domain", {"left", "right", "truncate", "lambda", "safety"});
        if (j.contains("left")) c.domain.left = get_end(j["left"], "left", -inf);
        if (j.contains("right")) c.domain.right = get_end(j["right"], "right", inf);
        if (j.contains("truncate")) c.domain.truncate = get_bool(j["truncate"], "domain.truncate");
        if (j.contains("lambda")) c.domain.lambda = get_real(j["lambda"], "lambda", "domain");
        if (j.contains("safety")) c.domain.safety = get_real(j["safety"], "safety", "domain");
    }
    if (root.contains("grid")) {
        const json& j = root["grid"];
        allow_keys(j, "grid", {"n_x", "n_t", "advection"});
        if (j.contains("n_x")) c.n_x = get_int(j["n_x"], "n_x", "grid");
        if (j.contains("n_t")) c.n_t = get_int(j["n_t"], "n_t", "grid");
        if (j.contains("advection")) c.advection = parse_advection(get_string(j["advection"], "grid.advection"));
    }
    if (root.contains("solver")) {
        const json& j = root["solver"];
        allow_keys(j, "solver",
                   {"method", "tol_F", "max_iter", "initial_step", "step_growth", "step_shrink", "min_step"});
        if (j.contains("method")) c.method = parse_solver_method(get_string(j["method"], "solver.method"));
        if (j.contains("tol_F")) c.solver.tol_F = get_real(j["tol_F"], "tol_F", "solver");
        if (j.contains("max_iter")) c.solver.max_iter = get_int(j["max_iter"], "max_iter", "solver");
        if (j.contains("initial_step")) c.solver.initial_step = get_real(j["initial_step"], "initial_step", "solver");
        if (j.contains("step_growth")) c.solver.step_growth = get_real(j["step_growth"], "step_growth", "solver");
        if (j.contains("step_shrink")) c.solver.step_shrink = get_real(j["step_shrink"], "step_shrink", "solver");
        if (j.contains("min_step")) c.solver.min_step = get_real(j["min_step"], "min_step", "solver");
    }
    if (root.contains("mc")) {
        const json& j = root["mc"];
        allow_keys(j, "mc", {"dt", "n_paths", "seed", "max_duration"});
        if (j.contains("dt")) c.mc.dt = get_real(j["dt"], "dt", "mc");
        if (j.contains("n_paths")) c.mc.n_paths = get_int(j["n_paths"], "n_paths", "mc");
        if (j.contains("seed")) {
            if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0))
                bad("'mc.seed' must be a non-negative integer");
            c.mc.seed = j["seed"].get<std::uint64_t>();
        }
        if (j.contains("max_duration")) c.mc.max_duration = get_real(j["max_duration"], "max_duration", "mc");
    }
    if (root.contains("s")) c.s = get_real(root["s"], "s", "config");
    if (root.contains("initial_states")) {
        const json& j = root["initial_states"];
        if (j.is_array()) {
            c.initial_states = get_reals(j, "initial_states");
        } else {
            allow_keys(j, "initial_states", {"count"});
            if (j.contains("count")) c.initial_count = get_int(j["count"], "count", "initial_states");
        }
    }
    if (root.contains("survival")) {
        const json& j = root["survival"];
        allow_keys(j, "survival", {"points", "tail_tol", "max_periods"});
        if (j.contains("points")) c.survival.points = get_reals(j["points"], "survival.points");
        if (j.contains("tail_tol")) c.survival.tail_tol = get_real(j["tail_tol"], "tail_tol", "survival");
        if (j.contains("max_periods")) c.survival.max_periods = get_int(j["max_periods"], "max_periods", "survival");
    }
    if (root.contains("resonance")) {
        const json& j = root["resonance"];
        allow_keys(j, "resonance", {"sweep", "find", "bracket", "tol_sigma", "target", "x_eval"});
        auto& r = c.resonance;
        if (j.contains("sweep")) {
            const json& w = j["sweep"];
            allow_keys(w, "resonance.sweep", {"lo", "hi", "points"});
            if (w.contains("lo")) r.sweep_lo = get_real(w["lo"], "lo", "resonance.sweep");
            if (w.contains("hi")) r.sweep_hi = get_real(w["hi"], "hi", "resonance.sweep");
            if (w.contains("points")) r.sweep_points = get_int(w["points"], "points", "resonance.sweep");
        }
        if (j.contains("find")) r.find = get_bool(j["find"], "resonance.find");
        if (j.contains("bracket")) {
            const auto b = get_reals(j["bracket"], "resonance.bracket");
            if (b.size() != 2) bad("'resonance.bracket' must have two entries");
            r.bracket_lo = b[0];
            r.bracket_hi = b[1];
        }
        if (j.contains("tol_sigma")) r.tol_sigma = get_real(j["tol_sigma"], "tol_sigma", "resonance");
        if (j.contains("target") && !j["target"].is_null()) r.target = get_real(j["target"], "target", "resonance");
        if (j.contains("x_eval")) r.x_eval = get_real(j["x_eval"], "x_eval", "resonance");
    }
    if (root.contains("threads")) c.threads = get_int(root["threads"], "threads", "config");
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidConfig, kParse, "cannot read " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

namespace {

json to_json(const RunConfig& c) {
    json params = json::object();
    for (const auto& [k, v] : c.params) params[k] = v;
    json j;
    j["mode"] = to_string(c.mode);
    j["sde"] = {{"family", c.family}, {"params", params}};
    j["domain"] = {{"left", end_to_json(c.domain.left)},
                   {"right", end_to_json(c.domain.right)},
                   {"truncate", c.domain.truncate},
                   {"lambda", c.domain.lambda},
                   {"safety", c.domain.safety}};
    j["grid"] = {{"n_x", c.n_x}, {"n_t", c.n_t}, {"advection", advection_name(c.advection)}};
    j["solver"] = {{"method", to_string(c.method)},          {"tol_F", c.solver.tol_F},
                   {"max_iter", c.solver.max_iter},          {"initial_step", c.solver.initial_step},
                   {"step_growth", c.solver.step_growth},    {"step_shrink", c.solver.step_shrink},
                   {"min_step", c.solver.min_step}};
    j["mc"] = {{"dt", c.mc.dt}, {"n_paths", c.mc.n_paths}, {"seed", c.mc.seed}, {"max_duration", c.mc.max_duration}};
    j["s"] = c.s;
    if (c.initial_states.empty())
        j["initial_states"] = {{"count", c.initial_count}};
    else
        j["initial_states"] = c.initial_states;
    j["survival"] = {{"points", c.survival.points},
                     {"tail_tol", c.survival.tail_tol},
                     {"max_periods", c.survival.max_periods}};
    const auto& r = c.resonance;
    j["resonance"] = {{"sweep", {{"lo", r.sweep_lo}, {"hi", r.sweep_hi}, {"points", r.sweep_points}}},
                      {"find", r.find},
                      {"bracket", {r.bracket_lo, r.bracket_hi}},
                      {"tol_sigma", r.tol_sigma},
                      {"target", r.target ? json(*r.target) : json(nullptr)},
                      {"x_eval", r.x_eval}};
    // Thread count changes scheduling only, never results, so it stays out of the hash.
    return j;
}

}  // namespace

std::string canonical_json(const RunConfig& config) { return to_json(config).dump(); }

std::string config_hash(const RunConfig& config) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : canonical_json(config)) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::InvalidConfig, "cli.validate", what); }

std::vector<double> uniform_interior(const ExitDomain& d, int count) {
    std::vector<double> xs;
    for (int i = 0; i < count; ++i) xs.push_back(d.lower() + d.length() * (i + 1) / (count + 1));
    return xs;
}

double sigma_sup(const PeriodicSde1D& sde, const ExitDomain& d) {
    if (sde.additive_sigma) return std::abs(*sde.additive_sigma);
    const double lo = std::isfinite(d.lower()) ? d.lower() : -8.0;
    const double hi = std::isfinite(d.upper()) ? d.upper() : 8.0;
    double m = 0.0;
    for (int i = 0; i < 32; ++i)
        for (int k = 0; k <= 64; ++k)
            m = std::max(m, std::abs(sde.sigma(sde.period * i / 32, lo + (hi - lo) * k / 64)));
    return m;
}

}  // namespace

ResolvedProblem resolve(const RunConfig& c) {
    ResolvedProblem p;
    try {
        p.sde = make_sde(c.family, c.params);
        p.domain = ExitDomain(c.domain.left, c.domain.right);
        if (!p.domain.bounded()) {
            if (!c.domain.truncate) invalid("unbounded domain requires \"truncate\": true");
            const auto dc = dissipativity_coefficients(p.sde, c.domain.lambda);
            double r_I = 0.0;
            for (double x : c.initial_states) r_I = std::max(r_I, std::abs(x));
            if (c.mode == RunMode::Survival)
                for (double x : c.survival.points) r_I = std::max(r_I, std::abs(x));
            if (c.mode == RunMode::Resonance) r_I = std::max(r_I, std::abs(c.resonance.x_eval));
            const auto cert = truncation_radius(dc.c, dc.lambda, sigma_sup(p.sde, p.domain),
                                                boundary_radius(p.domain), r_I, c.domain.safety);
            p.certificate = cert;
            p.domain = p.domain.truncated(cert.R_star, {});
        }
    } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidConfig) throw;
        invalid(e.what());
    }
    p.initial_states = c.initial_states.empty() ? uniform_interior(p.domain, c.initial_count) : c.initial_states;
    return p;
}

void validate(const RunConfig& c) {
    if (c.n_x < 3) invalid("grid.n_x must be >= 3");
    if (c.n_t < 0) invalid("grid.n_t must be >= 0");
    if (!(c.solver.tol_F > 0.0)) invalid("solver.tol_F must be positive");
    if (c.solver.max_iter < 1) invalid("solver.max_iter must be >= 1");
    if (!(c.solver.initial_step > 0.0) || !(c.solver.step_growth >= 1.0) || !(c.solver.step_shrink > 0.0) ||
        !(c.solver.step_shrink < 1.0) || !(c.solver.min_step > 0.0))
        invalid("solver step parameters out of range");
    if (c.method == SolverMethod::Direct && c.n_x > 2000) invalid("direct solver needs grid.n_x <= 2000");
    if (c.threads < 1) invalid("threads must be >= 1");
    if (c.initial_states.empty() && c.initial_count < 1) invalid("initial_states.count must be >= 1");
    try {
        c.mc.validate();
    } catch (const Error& e) {
        invalid(e.what());
    }

    const ResolvedProblem p = resolve(c);
    for (double x : p.initial_states)
        if (!p.domain.contains(x)) invalid("initial state " + std::to_string(x) + " outside the domain");
    if (c.mode == RunMode::Survival) {
        if (c.survival.points.empty()) invalid("survival.points is empty");
        for (double x : c.survival.points)
            if (!p.domain.contains(x)) invalid("survival point " + std::to_string(x) + " outside the domain");
        if (!(c.survival.tail_tol > 0.0)) invalid("survival.tail_tol must be positive");
        if (c.survival.max_periods < 1) invalid("survival.max_periods must be >= 1");
    }
    if (c.mode == RunMode::Pde || c.mode == RunMode::Compare || c.mode == RunMode::Survival) {
        const SpaceTimeGrid grid =
            make_grid(p.domain, p.sde.period, c.n_x, c.n_t > 0 ? c.n_t : default_time_steps(p.sde.period),
                      c.advection);
        try {
            lattice_index(grid, c.s, "cli.validate");
        } catch (const Error& e) {
            invalid(e.what());
        }
    }
    if (c.mode == RunMode::Resonance) {
        const auto& r = c.resonance;
        if (c.family != "duffing") invalid("resonance mode requires the duffing family");
        for (const auto& [k, v] : c.params)
            if (k != "A" && k != "omega" && k != "sigma") invalid("resonance mode does not accept sde.params." + k);
        if (r.sweep_points < 0) invalid("resonance.sweep.points must be >= 0");
        if (r.sweep_points > 0 && !(r.sweep_lo > 0.0 && r.sweep_hi >= r.sweep_lo))
            invalid("resonance.sweep needs 0 < lo <= hi");
        if (r.find && !(r.bracket_lo > 0.0 && r.bracket_hi > r.bracket_lo))
            invalid("resonance.bracket needs 0 < lo < hi");
        if (!(r.tol_sigma > 0.0)) invalid("resonance.tol_sigma must be positive");
        if (!p.domain.contains(r.x_eval)) invalid("resonance.x_eval outside the domain");
        if (c.params.contains("omega") && !(c.params.at("omega") > 0.0)) invalid("resonance mode needs omega > 0");
    }
}

namespace {

std::string number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::string& hash, std::vector<std::string> header)
        : out_(path, std::ios::binary) {
        if (!out_) throw Error(ErrorCode::InvalidArgument, "cli.run", "cannot write " + path.string());
        out_ << "# exittime " << version << " config_hash=" << hash << "\n";
        for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
        out_ << "\n";
    }
    void row(std::initializer_list<std::string> cells) {
        bool first = true;
        for (const auto& c : cells) {
            out_ << (first ? "" : ",") << c;
            first = false;
        }
        out_ << "\n";
    }

private:
    std::ofstream out_;
};

void write_json(const std::filesystem::path& path, json j, const std::string& hash) {
    j["version"] = version;
    j["config_hash"] = hash;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cli.run", "cannot write " + path.string());
    out << j.dump(2) << "\n";
}

json report_json(const SolverReport& r, const PeriodicSolution& sol) {
    json j;
    j["solver"] = sol.solver;
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    j["period_sweeps"] = r.period_sweeps;
    j["tolerance_used"] = r.tolerance_used;
    j["final_cost"] = sol.final_cost;
    j["cost_history"] = r.cost_history;
    j["contraction_estimates"] = r.contraction_estimates;
    if (!r.step_sizes.empty()) j["step_sizes"] = r.step_sizes;
    if (sol.solver == "direct") {
        j["spectral_radius"] = r.spectral_radius;
        j["condition_estimate"] = r.condition_estimate;
    }
    return j;
}

json certificate_json(const std::optional<DissipativityCertificate>& c) {
    if (!c) return nullptr;
    return {{"c", c->c}, {"lambda", c->lambda}, {"r_star", c->r_star}, {"R_star", c->R_star},
            {"r_D", c->r_D}, {"r_I", c->r_I}};
}

struct PdeRun {
    SpaceTimeGrid grid;
    SolveResult result;
    PeriodicSolution tau;
    int slice = 0;
};

PdeRun run_pde(const RunConfig& c, const ResolvedProblem& p) {
    PdeRun r;
    r.grid = make_grid(p.domain, p.sde.period, c.n_x, c.n_t > 0 ? c.n_t : default_time_steps(p.sde.period),
                       c.advection);
    r.result = solve_periodic(c.method, Source::constant(1.0), p.sde, r.grid, c.solver);
    r.tau = to_expected_duration(r.result.solution);
    r.slice = lattice_index(r.grid, c.s, "cli.run");
    return r;
}

double relative_error(const std::vector<double>& mc, const std::vector<double>& pde) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < mc.size(); ++i) {
        num += (mc[i] - pde[i]) * (mc[i] - pde[i]);
        den += mc[i] * mc[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

}  // namespace

RunOutcome run(const RunConfig& config, const std::filesystem::path& out_dir) {
    validate(config);
    const ResolvedProblem p = resolve(config);
    const std::string hash = config_hash(config);
    McConfig mc = config.mc;
    mc.threads = config.threads;

    RunOutcome outcome;
    json summary;
    summary["mode"] = to_string(config.mode);
    summary["domain"] = {p.domain.lower(), p.domain.upper()};
    summary["truncation"] = certificate_json(p.certificate);

    // Everything is computed before the output directory is touched.
    std::function<void()> write;
    switch (config.mode) {
        case RunMode::Mc: {
            auto stats = estimate_expected_exit_curve(p.sde, p.domain, config.s, p.initial_states, mc);
            int censored = 0;
            for (const auto& st : stats) censored += st.n_censored;
            summary["points"] = stats.size();
            summary["n_censored"] = censored;
            write = [&, stats] {
                CsvWriter csv(out_dir / "mc.csv", hash, {"x", "mean", "std_error", "n_censored"});
                for (const auto& st : stats)
                    csv.row({number(st.initial_state), number(st.mean), number(st.std_error),
                             std::to_string(st.n_censored)});
                outcome.files.push_back(out_dir / "mc.csv");
            };
            break;
        }
        case RunMode::Pde: {
            auto pde = std::make_shared<PdeRun>(run_pde(config, p));
            summary["solve"] = report_json(pde->result.report, pde->result.solution);
            const GridAdvisory adv = grid_advisory(p.sde, pde->grid);
            summary["grid"] = {{"n_x", pde->grid.n_x}, {"n_t", pde->grid.n_t}, {"h", pde->grid.h()},
                               {"dt", pde->grid.dt()}, {"max_cell_peclet", adv.max_cell_peclet},
                               {"cfl", adv.cfl}, {"upwind_nodes", adv.upwind_nodes}};
            summary["s"] = config.s;
            write = [&, pde] {
                CsvWriter csv(out_dir / "tau.csv", hash, {"x", "tau"});
                const Field& f = pde->tau.slices[pde->slice];
                for (int i = 0; i < pde->grid.n_x; ++i) csv.row({number(pde->grid.x(i)), number(f.values[i])});
                outcome.files.push_back(out_dir / "tau.csv");
                write_json(out_dir / "solver.json", summary, hash);
                outcome.files.push_back(out_dir / "solver.json");
            };
            break;
        }
        case RunMode::Compare: {
            auto pde = std::make_shared<PdeRun>(run_pde(config, p));
            auto stats = estimate_expected_exit_curve(p.sde, p.domain, config.s, p.initial_states, mc);
            std::vector<double> mc_all, pde_all, mc_right, pde_right;
            for (const auto& st : stats) {
                const double v = interpolate(pde->tau.slices[pde->slice], pde->grid, st.initial_state);
                mc_all.push_back(st.mean);
                pde_all.push_back(v);
                if (st.initial_state > 0.0) {
                    mc_right.push_back(st.mean);
                    pde_right.push_back(v);
                }
            }
            summary["solve"] = report_json(pde->result.report, pde->result.solution);
            summary["rel_err_full"] = relative_error(mc_all, pde_all);
            summary["rel_err_right_well"] = relative_error(mc_right, pde_right);
            summary["points"] = stats.size();
            write = [&, stats, pde_all] {
                CsvWriter csv(out_dir / "compare.csv", hash,
                              {"x", "mc_mean", "mc_std_error", "n_censored", "pde", "rel_err"});
                for (std::size_t i = 0; i < stats.size(); ++i) {
                    const auto& st = stats[i];
                    const double rel = st.mean != 0.0 ? std::abs(st.mean - pde_all[i]) / st.mean : 0.0;
                    csv.row({number(st.initial_state), number(st.mean), number(st.std_error),
                             std::to_string(st.n_censored), number(pde_all[i]), number(rel)});
                }
                outcome.files.push_back(out_dir / "compare.csv");
                write_json(out_dir / "summary.json", summary, hash);
                outcome.files.push_back(out_dir / "summary.json");
            };
            break;
        }
        case RunMode::Resonance: {
            ResonanceSetup setup;
            if (config.params.contains("A")) setup.amplitude = config.params.at("A");
            if (config.params.contains("omega")) setup.omega = config.params.at("omega");
            setup.domain = p.domain;
            setup.n_x = config.n_x;
            setup.n_t = config.n_t;
            setup.advection = config.advection;
            setup.method = config.method;
            setup.options = config.solver;
            setup.x_eval = config.resonance.x_eval;
            setup.lambda = config.domain.lambda;
            setup.safety = config.domain.safety;
            setup.threads = config.threads;
            const auto& r = config.resonance;
            std::vector<double> sigmas;
            for (int k = 0; k < r.sweep_points; ++k)
                sigmas.push_back(r.sweep_points == 1 ? r.sweep_lo
                                                     : r.sweep_lo + (r.sweep_hi - r.sweep_lo) * k / (r.sweep_points - 1));
            auto sweep = sweep_sigma(sigmas, setup);
            summary["sweep_points"] = sweep.size();
            if (r.find) {
                const double target = r.target.value_or(std::numbers::pi / setup.omega);
                std::map<double, SweepResult> known;
                for (const auto& e : sweep) known.emplace(e.sigma, e);
                const ResonanceResult res = find_resonance(target, r.bracket_lo, r.bracket_hi, r.tol_sigma,
                                                           [&](double sigma) {
                                                               auto it = known.find(sigma);
                                                               if (it != known.end()) return it->second;
                                                               return evaluate_sigma(sigma, setup);
                                                           });
                json evals = json::array();
                for (const auto& e : res.evaluations) evals.push_back({{"sigma", e.sigma}, {"tau_at_one", e.tau_at_one}});
                summary["sigma_star"] = res.sigma_star;
                summary["bracket"] = {res.sigma_lo, res.sigma_hi};
                summary["target"] = res.target;
                summary["non_monotone"] = res.non_monotone;
                summary["evaluations"] = evals;
            }
            write = [&, sweep] {
                CsvWriter csv(out_dir / "sweep.csv", hash,
                              {"sigma", "tau_at_one", "converged", "R_star", "truncation_ok"});
                for (const auto& e : sweep)
                    csv.row({number(e.sigma), number(e.tau_at_one), e.converged ? "1" : "0", number(e.R_star),
                             e.truncation_ok ? "1" : "0"});
                outcome.files.push_back(out_dir / "sweep.csv");
                write_json(out_dir / "resonance.json", summary, hash);
                outcome.files.push_back(out_dir / "resonance.json");
            };
            break;
        }
        case RunMode::Survival: {
            const SpaceTimeGrid grid = make_grid(
                p.domain, p.sde.period, config.n_x, config.n_t > 0 ? config.n_t : default_time_steps(p.sde.period),
                config.advection);
            struct Row {
                double x, node, duration;
                std::size_t steps;
            };
            std::vector<Row> rows;
            for (double x : config.survival.points) {
                int i = static_cast<int>(std::lround((x - grid.a) / grid.h())) - 1;
                i = std::clamp(i, 0, grid.n_x - 1);
                const SurvivalResult sr =
                    survival_duration(p.sde, grid, config.s, i, config.survival.tail_tol, config.survival.max_periods);
                rows.push_back({x, grid.x(i), sr.duration, sr.survival.size() - 1});
            }
            summary["points"] = rows.size();
            write = [&, rows] {
                CsvWriter csv(out_dir / "survival.csv", hash, {"x", "node", "duration", "steps"});
                for (const auto& r : rows)
                    csv.row({number(r.x), number(r.node), number(r.duration), std::to_string(r.steps)});
                outcome.files.push_back(out_dir / "survival.csv");
            };
            break;
        }
    }

    std::filesystem::create_directories(out_dir);
    write();
    summary["version"] = version;
    summary["config_hash"] = hash;
    outcome.summary_json = summary.dump();
    return outcome;
}

int default_threads() {
    if (const char* env = std::getenv("EXITTIME_THREADS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && n >= 1 && n <= 1024) return static_cast<int>(n);
    }
    return 1;
}

}  // namespace exittime
