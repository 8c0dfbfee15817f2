#pragma once

// Scenario runner: builds cascade data, evolves it on either engine, tracks
// norms and the y/z split along a sample grid, and writes a CSV series plus a
// JSON summary.  Also the δ → (Q, r, T, k₀) parameter table.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bp_construction.hpp"
#include "grid_solver.hpp"
#include "mild_solver.hpp"
#include "norms.hpp"

namespace mhdinf {

inline constexpr int kReportVersion = 1;
inline constexpr double kRatioFloor = 1e-300;

enum class Scenario { inflation, zero_velocity, cancellation };
enum class Engine { mode, grid };

inline const char* to_string(Scenario s) {
    switch (s) {
        case Scenario::inflation: return "inflation";
        case Scenario::zero_velocity: return "zero_velocity";
        case Scenario::cancellation: return "cancellation";
    }
    return "?";
}
inline const char* to_string(Engine e) { return e == Engine::mode ? "mode" : "grid"; }

inline Scenario scenario_from_string(const std::string& s) {
    if (s == "inflation") return Scenario::inflation;
    if (s == "zero_velocity") return Scenario::zero_velocity;
    if (s == "cancellation") return Scenario::cancellation;
    throw PreconditionError("unknown scenario: " + s);
}
inline Engine engine_from_string(const std::string& s) {
    if (s == "mode") return Engine::mode;
    if (s == "grid") return Engine::grid;
    throw PreconditionError("unknown engine: " + s);
}

/// Error raised inside a named stage of a scenario run.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what) : Error(stage + ": " + what), stage(std::move(stage)) {}
    std::string stage;
};

struct ScenarioConfig {
    Scenario scenario = Scenario::inflation;
    BPParams params = [] {
        BPParams p;
        p.Q = 1;
        p.r = 2;
        p.k0_mag = 8;
        p.law = CascadeLaw::tempered;
        p.T = 0.05;
        return p;
    }();
    Engine engine = Engine::grid;
    int N = 64;                          ///< grid points per axis, doubled per axis until data and first iterates are resolved
    std::optional<double> dt;            ///< fixed grid step; adaptive when empty
    int depth = 2;                       ///< Picard depth on the mode engine
    int samples = 10;                    ///< uniform samples on (0, T] plus t = 0
    std::vector<double> times;           ///< explicit sample times; overrides `samples`
    double snapshot_drop = 1e-10;        ///< grid snapshots: coefficients below this times the largest are dropped
    std::uint64_t seed = 0;
    std::string csv_name = "series.csv";
    std::string json_name = "summary.json";
};

inline void validate(const ScenarioConfig& c) {
    validate_params(c.params);
    require(c.params.T > 0.0, "ScenarioConfig: horizon T must be positive");
    require(c.N >= 8 && c.depth >= 1 && c.samples >= 1, "ScenarioConfig: need N >= 8, depth >= 1, samples >= 1");
    require(!c.dt || *c.dt > 0.0, "ScenarioConfig: dt must be positive");
    for (double t : c.times) require(t >= 0.0 && t <= c.params.T, "ScenarioConfig: sample times must lie in [0, T]");
    if (c.engine == Engine::grid)
        require(c.params.law == CascadeLaw::tempered, "ScenarioConfig: the grid engine needs the tempered law");
}

inline nlohmann::json to_json(const ScenarioConfig& c) {
    nlohmann::json j{{"scenario", to_string(c.scenario)},
                     {"params", to_json(c.params)},
                     {"engine", to_string(c.engine)},
                     {"N", c.N},
                     {"depth", c.depth},
                     {"samples", c.samples},
                     {"times", c.times},
                     {"snapshot_drop", c.snapshot_drop},
                     {"seed", c.seed},
                     {"csv", c.csv_name},
                     {"json", c.json_name}};
    j["dt"] = c.dt ? nlohmann::json(*c.dt) : nlohmann::json(nullptr);
    return j;
}

inline ScenarioConfig config_from_json(const nlohmann::json& j) {
    ScenarioConfig c;
    if (j.contains("scenario")) c.scenario = scenario_from_string(j["scenario"].get<std::string>());
    if (j.contains("params")) {
        nlohmann::json p = to_json(c.params);
        p.update(j["params"]);
        c.params = params_from_json(p);
    }
    if (j.contains("engine")) c.engine = engine_from_string(j["engine"].get<std::string>());
    c.N = j.value("N", c.N);
    if (j.contains("dt") && !j["dt"].is_null()) c.dt = j["dt"].get<double>();
    c.depth = j.value("depth", c.depth);
    c.samples = j.value("samples", c.samples);
    if (j.contains("times")) c.times = j["times"].get<std::vector<double>>();
    c.snapshot_drop = j.value("snapshot_drop", c.snapshot_drop);
    c.seed = j.value("seed", c.seed);
    c.csv_name = j.value("csv", c.csv_name);
    c.json_name = j.value("json", c.json_name);
    validate(c);
    return c;
}

inline std::vector<double> sample_times(const ScenarioConfig& c) {
    std::vector<double> t = c.times;
    if (t.empty())
        for (int i = 0; i <= c.samples; ++i) t.push_back(c.params.T * i / c.samples);
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return t;
}

// ---------------------------------------------------------------------------
// Scenario data

struct ScenarioData {
    WaveSystem ws;
    ModeField u0, b0;
};

inline ScenarioData scenario_data(const ScenarioConfig& c) {
    ScenarioData d;
    d.ws = build_wave_system(c.params, true);
    const InitialData id = build_initial_data(d.ws, double(c.params.Q), double(c.params.r));
    switch (c.scenario) {
        case Scenario::inflation:
            d.u0 = id.u0;
            d.b0 = id.b0;
            break;
        case Scenario::zero_velocity:
            d.b0 = id.u0 + id.b0;
            break;
        case Scenario::cancellation:
            d.u0 = id.u0 + id.b0;
            d.b0 = d.u0;
            break;
    }
    d.u0.set_divergence_free(true);
    d.b0.set_divergence_free(true);
    return d;
}

/// Per axis: N doubled until every wave vector of the given fields satisfies 3|k_i| < n_i.
inline GridShape auto_shape(int N, std::initializer_list<const ModeField*> fields) {
    std::array<int, 3> n{N, N, N};
    for (const ModeField* f : fields) {
        const IVec3 k = f->max_wavenumber();
        for (int i = 0; i < 3; ++i)
            while (3 * k[i] >= n[i]) n[i] *= 2;
    }
    return {n[0], n[1], n[2]};
}

/// √(|c_cos|² + |c_sin|²) of the η mode at time t.
inline double eta_amplitude(const ModeField& f, const IVec3& eta, double t) {
    const auto [kc, sc] = canonical_key(eta, Parity::cos);
    double a = 0.0;
    for (Parity p : {Parity::cos, Parity::sin}) {
        const auto it = f.modes().find({kc.k, p});
        if (it != f.modes().end()) {
            const Vec3 v = it->second(t);
            a += dot(v, v);
        }
    }
    return std::sqrt(a);
}

inline ModeField without_eta(const ModeField& f, const IVec3& eta) {
    const IVec3 k = canonical_key(eta, Parity::cos).first.k;
    ModeField out(f.options());
    for (const auto& [key, c] : f.modes())
        if (key.k != k) out.emplace_canonical(key, VecExpPoly(c));
    return out;
}

// ---------------------------------------------------------------------------
// Report

struct SeriesRow {
    double t = 0.0;
    double sqrt_t_linf_u = 0.0, sqrt_t_linf_b = 0.0;
    double besov_u = 0.0, besov_b = 0.0;
    double b10_amp = 0.0, b11_norm = 0.0;
    double y_norm = 0.0, z_norm = 0.0;
};

inline constexpr const char* kCsvHeader = "t,sqrt_t_linf_u,sqrt_t_linf_b,besov_u,besov_b,b10_amp,b11_norm,y_norm,z_norm";

struct ScenarioReport {
    ScenarioConfig config;
    std::optional<GridShape> shape;
    std::vector<SeriesRow> rows;
    std::vector<double> u1_norm;  ///< ‖u₁(t)‖_∞ per sample
    std::vector<double> u_minus_b;  ///< ‖u(t) − b(t)‖_∞ per sample
    double eta_u_T = 0.0;           ///< η-mode amplitude of u(T)
    double eta_u1_T = 0.0;          ///< η-mode amplitude of u₁(T)
    bool u1_zero = false, b1_zero = false;
    nlohmann::json checks = nlohmann::json::object();
    bool pass = false;

    const SeriesRow& initial() const { return rows.front(); }
    const SeriesRow& final_row() const { return rows.back(); }
    double b_ratio() const { return final_row().besov_b / std::max(initial().besov_b, kRatioFloor); }
    double u_ratio() const { return final_row().besov_u / std::max(initial().besov_u, kRatioFloor); }
};

namespace detail {

template <class F>
auto stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

inline double linf_or_zero(const ModeField& f, double t, const LinfOptions& o) { return f.empty() ? 0.0 : linf_norm(f, t, o).value; }

inline double besov_or_zero(const ModeField& f) {
    return f.empty() ? 0.0 : besov_minus1_inf(f, BesovVariant::inhomogeneous).value;
}

inline ModeField pruned_snapshot(const GridField& g, double rel) { return to_mode_field(g, rel * g.max_coefficient()); }

/// Scenario predicates, recomputable from the series and the summary fields.
inline void evaluate_checks(ScenarioReport& r) {
    auto& c = r.checks;
    const auto& rows = r.rows;
    bool ok = true;
    switch (r.config.scenario) {
        case Scenario::inflation: {
            double worst = 0.0;
            bool consistent = true;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                worst = std::max(worst, rows[i].besov_u / std::max(rows[0].besov_u, kRatioFloor));
                consistent = consistent && rows[i].besov_u <= (rows[0].besov_u + r.u1_norm[i] + rows[i].y_norm) * (1 + 1e-9);
            }
            c["u_growth_max"] = worst;
            c["u_bounded"] = worst <= 3.0;
            c["u_consistency"] = consistent;
            c["b_ratio"] = r.b_ratio();
            ok = worst <= 3.0 && consistent;
            break;
        }
        case Scenario::zero_velocity: {
            const double rel = std::abs(r.eta_u_T - r.eta_u1_T) / std::max(r.eta_u1_T, kRatioFloor);
            c["u0_zero"] = rows.front().besov_u == 0.0;
            c["uT_positive"] = rows.back().besov_u > 0.0;
            c["eta_mode_rel_diff"] = rel;
            c["eta_mode_match"] = rel <= 0.1;
            c["u_ratio"] = r.u_ratio();
            ok = rows.front().besov_u == 0.0 && rows.back().besov_u > 0.0 && rel <= 0.1;
            break;
        }
        case Scenario::cancellation: {
            double umb = 0.0;
            for (double v : r.u_minus_b) umb = std::max(umb, v);
            c["u1_zero"] = r.u1_zero;
            c["b1_zero"] = r.b1_zero;
            c["b_decays"] = rows.back().besov_b <= rows.front().besov_b;
            c["u_minus_b_max"] = umb;
            c["u_equals_b"] = umb <= 1e-10;
            ok = r.u1_zero && r.b1_zero && rows.back().besov_b <= rows.front().besov_b && umb <= 1e-10;
            break;
        }
    }
    r.pass = ok;
}

}  // namespace detail

inline ScenarioReport run_scenario(const ScenarioConfig& cfg) {
    detail::stage("config", [&] {
        validate(cfg);
        return 0;
    });
    ScenarioReport rep;
    rep.config = cfg;
    const std::vector<double> ts = sample_times(cfg);
    const double T = cfg.params.T;
    const ScenarioData data = detail::stage("build-data", [&] { return scenario_data(cfg); });
    const IVec3 eta = cfg.params.eta;

    const FirstIteratePair first = detail::stage("first-iterates", [&] { return first_iterates(data.u0, data.b0); });
    rep.u1_zero = first.u1.empty();
    rep.b1_zero = first.b1.empty();
    const ModeField lin_u = heat_propagate(data.u0) - first.u1;
    const ModeField lin_b = heat_propagate(data.b0) - first.b1;

    // Snapshots of u, b, y, z at the sample times.
    std::vector<ModeField> us, bs, ys, zs;
    std::vector<double> umb;
    detail::stage("evolve", [&] {
        if (cfg.engine == Engine::mode) {
            PicardOptions po;
            po.T = T;
            po.depth = cfg.depth;
            po.record = false;
            const PicardResult pr = picard_solve(data.u0, data.b0, po);
            const ModeField y = pr.u - lin_u, z = pr.b - lin_b;
            for (double t : ts) {
                // Every iterate equals the data at t = 0; summing the Duhamel terms there only adds roundoff.
                us.push_back(t == 0.0 ? data.u0 : pr.u.at_time(t));
                bs.push_back(t == 0.0 ? data.b0 : pr.b.at_time(t));
                ys.push_back(t == 0.0 ? ModeField{} : y.at_time(t));
                zs.push_back(t == 0.0 ? ModeField{} : z.at_time(t));
                const ModeField d = us.back() - bs.back();
                umb.push_back(d.empty() ? 0.0 : linf_norm(d, 0.0).value);
            }
        } else {
            const GridShape s = auto_shape(cfg.N, {&data.u0, &data.b0, &first.u1, &first.b1});
            rep.shape = s;
            SolveOptions so;
            so.T = ts.back();
            so.sample_times = ts;
            so.dt = cfg.dt;
            solve_grid(sample(data.u0, s), sample(data.b0, s), so, [&](double t, const GridField& u, const GridField& b) {
                us.push_back(detail::pruned_snapshot(u, cfg.snapshot_drop));
                bs.push_back(detail::pruned_snapshot(b, cfg.snapshot_drop));
                ys.push_back(detail::pruned_snapshot(u - sample(lin_u, s, t), cfg.snapshot_drop));
                zs.push_back(detail::pruned_snapshot(b - sample(lin_b, s, t), cfg.snapshot_drop));
                umb.push_back(grid_sup_norm((u - b).to_physical()));
            });
        }
        return 0;
    });
    rep.u_minus_b = umb;

    detail::stage("norms", [&] {
        LinfOptions lo;
        const ModeField b11 = without_eta(first.b1, eta);
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const double t = ts[i];
            SeriesRow row;
            row.t = t;
            row.sqrt_t_linf_u = std::sqrt(t) * detail::linf_or_zero(us[i], 0.0, lo);
            row.sqrt_t_linf_b = std::sqrt(t) * detail::linf_or_zero(bs[i], 0.0, lo);
            row.besov_u = detail::besov_or_zero(us[i]);
            row.besov_b = detail::besov_or_zero(bs[i]);
            row.b10_amp = eta_amplitude(first.b1, eta, t);
            row.b11_norm = detail::linf_or_zero(b11, t, lo);
            row.y_norm = detail::linf_or_zero(ys[i], 0.0, lo);
            row.z_norm = detail::linf_or_zero(zs[i], 0.0, lo);
            rep.rows.push_back(row);
            rep.u1_norm.push_back(detail::linf_or_zero(first.u1, t, lo));
        }
        rep.eta_u_T = eta_amplitude(us.back(), eta, 0.0);
        rep.eta_u1_T = eta_amplitude(first.u1, eta, ts.back());
        return 0;
    });
    detail::evaluate_checks(rep);
    return rep;
}

// ---------------------------------------------------------------------------
// Output

/// Shortest decimal that reads back to the same double.
inline std::string shortest(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline std::string to_csv(const ScenarioReport& r) {
    std::string out = std::string(kCsvHeader) + "\n";
    for (const auto& row : r.rows) {
        for (double v : {row.t, row.sqrt_t_linf_u, row.sqrt_t_linf_b, row.besov_u, row.besov_b, row.b10_amp, row.b11_norm, row.y_norm}) {
            out += shortest(v);
            out += ',';
        }
        out += shortest(row.z_norm);
        out += '\n';
    }
    return out;
}

inline nlohmann::json row_json(const SeriesRow& r) {
    return {{"t", r.t},           {"sqrt_t_linf_u", r.sqrt_t_linf_u}, {"sqrt_t_linf_b", r.sqrt_t_linf_b},
            {"besov_u", r.besov_u}, {"besov_b", r.besov_b},           {"b10_amp", r.b10_amp},
            {"b11_norm", r.b11_norm}, {"y_norm", r.y_norm},           {"z_norm", r.z_norm}};
}

inline nlohmann::json to_json(const ScenarioReport& r) {
    nlohmann::json j;
    j["version"] = kReportVersion;
    j["scenario"] = to_string(r.config.scenario);
    j["engine"] = to_string(r.config.engine);
    j["config"] = to_json(r.config);
    j["grid_shape"] = r.shape ? nlohmann::json{r.shape->nx, r.shape->ny, r.shape->nz} : nlohmann::json(nullptr);
    j["besov_variant"] = "inhomogeneous";
    j["initial"] = row_json(r.initial());
    j["final"] = row_json(r.final_row());
    j["ratios"] = {{"b", r.b_ratio()}, {"u", r.u_ratio()}, {"floor", kRatioFloor}};
    j["decomposition"] = {{"b10_amp", r.final_row().b10_amp},
                          {"b11_norm", r.final_row().b11_norm},
                          {"y_norm", r.final_row().y_norm},
                          {"z_norm", r.final_row().z_norm},
                          {"u1_zero", r.u1_zero},
                          {"b1_zero", r.b1_zero},
                          {"eta_u_T", r.eta_u_T},
                          {"eta_u1_T", r.eta_u1_T}};
    j["series"] = {{"u1_norm", r.u1_norm}, {"u_minus_b", r.u_minus_b}};
    j["checks"] = r.checks;
    j["pass"] = r.pass;
    return j;
}

namespace detail {

/// Writes all files or none: each goes to a temporary name first.
inline void write_all(const std::filesystem::path& dir, const std::vector<std::pair<std::string, std::string>>& files) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> tmp;
    try {
        for (const auto& [name, text] : files) {
            const auto p = dir / (name + ".tmp");
            std::ofstream os(p, std::ios::binary);
            if (!os) throw Error("cannot open " + p.string());
            tmp.push_back(p);
            os << text;
            if (!os.flush()) throw Error("write failed: " + p.string());
        }
        for (std::size_t i = 0; i < files.size(); ++i) std::filesystem::rename(tmp[i], dir / files[i].first);
    } catch (...) {
        for (const auto& p : tmp) std::filesystem::remove(p);
        for (const auto& [name, text] : files) std::filesystem::remove(dir / name);
        throw;
    }
}

}  // namespace detail

inline void write_report(const ScenarioReport& r, const std::filesystem::path& dir) {
    detail::stage("report", [&] {
        detail::write_all(dir, {{r.config.csv_name, to_csv(r)}, {r.config.json_name, to_json(r).dump(2) + "\n"}});
        return 0;
    });
}

// ---------------------------------------------------------------------------
// Q sweep of the inflation scenario

struct InflationSweep {
    std::vector<ScenarioReport> runs;
    bool monotone = false;  ///< b ratio strictly increasing in Q
    bool u_bounded = false; ///< every run keeps ‖u(t)‖ within 3× its initial value
};

inline InflationSweep run_inflation_sweep(ScenarioConfig cfg, const std::vector<std::int64_t>& Qs) {
    require(Qs.size() >= 2 && std::is_sorted(Qs.begin(), Qs.end()), "run_inflation_sweep: need increasing Q values");
    cfg.scenario = Scenario::inflation;
    InflationSweep s;
    s.monotone = true;
    s.u_bounded = true;
    for (std::int64_t Q : Qs) {
        cfg.params.Q = Q;
        s.runs.push_back(run_scenario(cfg));
        s.u_bounded = s.u_bounded && s.runs.back().checks["u_bounded"].get<bool>();
        if (s.runs.size() > 1) s.monotone = s.monotone && s.runs.back().b_ratio() > s.runs[s.runs.size() - 2].b_ratio();
    }
    return s;
}

inline nlohmann::json to_json(const InflationSweep& s) {
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& r : s.runs)
        runs.push_back({{"Q", r.config.params.Q}, {"b_ratio", r.b_ratio()}, {"u_growth_max", r.checks["u_growth_max"]}, {"pass", r.pass}});
    return {{"version", kReportVersion}, {"runs", runs}, {"monotone", s.monotone}, {"u_bounded", s.u_bounded}};
}

// ---------------------------------------------------------------------------
// Parameter chain

struct ChainRow {
    double delta = 0.0;
    CascadeLaw law = CascadeLaw::paper;
    std::int64_t Q = 0, r = 0, k0_mag = 0, beta = 0;
    double T = 0.0;
    double T_beta = 0.0;   ///< |k₀|^{-2}
    double log2_k1 = 0.0;
    double log2_kr = 0.0;
    bool amplitude = false;  ///< Q²/r < Q^{-1/2}
    bool horizon = false;    ///< Q² √T < Q^{-1/2}
    bool scale = false;      ///< |k₁|^{-2} ≤ T/100
};

/// Magnitudes are followed in log₂ only, so any r is fine.
inline std::vector<ChainRow> parameter_chain_table(const std::vector<double>& deltas, CascadeLaw law = CascadeLaw::paper) {
    std::vector<ChainRow> out;
    for (double d : deltas) {
        const BPParams p = resolve_parameters(d, law);
        ChainRow row;
        row.delta = d;
        row.law = law;
        row.Q = p.Q;
        row.r = p.r;
        row.k0_mag = p.k0_mag;
        row.beta = p.Q * p.Q * p.Q;
        row.T = p.T;
        row.T_beta = 1.0 / (double(p.k0_mag) * double(p.k0_mag));
        const double l0 = std::log2(double(p.k0_mag));
        double lg = l0;
        for (std::int64_t s = 1; s <= p.r; ++s) {
            lg = law == CascadeLaw::paper ? double(s) + l0 + lg : double(s) + l0;
            if (s == 1) row.log2_k1 = lg;
        }
        row.log2_kr = lg;
        const ChainChecks cc = chain_checks(p);
        row.amplitude = cc.amplitude;
        row.horizon = cc.horizon;
        row.scale = std::exp2(-2.0 * row.log2_k1) <= p.T / 100.0;
        out.push_back(row);
    }
    return out;
}

inline nlohmann::json to_json(const std::vector<ChainRow>& rows) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& r : rows)
        a.push_back({{"delta", r.delta}, {"law", to_string(r.law)}, {"Q", r.Q},         {"r", r.r},
                     {"T", r.T},         {"k0_mag", r.k0_mag},      {"beta", r.beta},   {"T_beta", r.T_beta},
                     {"log2_k1", r.log2_k1}, {"log2_kr", r.log2_kr}, {"amplitude", r.amplitude},
                     {"horizon", r.horizon}, {"scale", r.scale}});
    return {{"version", kReportVersion}, {"rows", a}};
}

}  // namespace mhdinf
