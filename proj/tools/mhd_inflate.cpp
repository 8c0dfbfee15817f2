// mhd-inflate: batch front end for data construction, evolution, norms,
// audits, scenarios and the parameter chain.  Every subcommand reads one JSON
// config, writes JSON/CSV into --out and echoes the effective config.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mhdinf/mhdinf.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mhdinf;

namespace {

struct Common {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
};

json load_config(const Common& c) {
    json j = json::object();
    if (!c.config.empty()) {
        std::ifstream is(c.config);
        if (!is) throw Error("cannot read config " + c.config);
        j = json::parse(is);
    }
    if (c.seed) j["seed"] = *c.seed;
    return j;
}

void write_json(const Common& c, const std::string& name, json j) {
    detail::write_all(c.out, {{name, j.dump(2) + "\n"}});
    std::cout << (fs::path(c.out) / name).string() << "\n";
}

/// Cascade parameters: explicit "params", or "delta" (+ "law") resolved.
BPParams params_of(const json& j) {
    if (j.contains("delta")) return resolve_parameters(j["delta"].get<double>(), cascade_law_from_string(j.value("law", std::string("paper"))));
    return config_from_json(json{{"params", j.value("params", json::object())}, {"engine", "mode"}}).params;
}

void build_data(const Common& c) {
    const json cfg = load_config(c);
    const BPParams p = params_of(cfg);
    const WaveSystem ws = build_wave_system(p);
    json out{{"version", kReportVersion}, {"params", to_json(p)}, {"wave_system", to_json(ws)}, {"validation", to_json(validate_wave_system(ws))}};
    if (p.r % (p.Q * p.Q * p.Q) == 0) out["schedule"] = to_json(build_schedule(p, ws));
    if (p.T > 0.0) out["b10_amplitude_at_T"] = b10_amplitude(ws, double(p.Q), double(p.r), p.T);
    if (ws.exact()) {
        const InitialData d = build_initial_data(ws, double(p.Q), double(p.r));
        out["u0"] = to_json(d.u0);
        out["b0"] = to_json(d.b0);
    }
    write_json(c, "data.json", out);
}

void evolve(const Common& c) {
    json cfg = load_config(c);
    const ScenarioConfig sc = config_from_json(cfg);
    const ScenarioData d = scenario_data(sc);
    json out{{"version", kReportVersion}, {"config", to_json(sc)}};
    if (sc.engine == Engine::mode) {
        PicardOptions po;
        po.T = sc.params.T;
        po.depth = sc.depth;
        po.record = cfg.value("record", true);
        const PicardResult r = picard_solve(d.u0, d.b0, po);
        out["picard"] = {{"depth", r.depth}, {"record", to_json(r.record)}};
        out["u"] = to_json(r.u);
        out["b"] = to_json(r.b);
    } else {
        const FirstIteratePair f = first_iterates(d.u0, d.b0);
        const GridShape s = auto_shape(sc.N, {&d.u0, &d.b0, &f.u1, &f.b1});
        SolveOptions so;
        so.T = sc.params.T;
        so.dt = sc.dt;
        const GridTrajectory tr = solve_grid(sample(d.u0, s), sample(d.b0, s), so);
        out["grid_shape"] = {s.nx, s.ny, s.nz};
        out["stats"] = {{"steps", tr.stats.steps}, {"smallest_dt", tr.stats.smallest_dt}, {"largest_dt", tr.stats.largest_dt}};
        out["u_T"] = to_json(to_mode_field(tr.u.back(), sc.snapshot_drop * tr.u.back().max_coefficient()));
        out["b_T"] = to_json(to_mode_field(tr.b.back(), sc.snapshot_drop * tr.b.back().max_coefficient()));
    }
    write_json(c, "trajectory.json", out);
}

void norms(const Common& c) {
    const json cfg = load_config(c);
    json out{{"version", kReportVersion}};
    if (cfg.contains("field_file")) {
        std::ifstream is(cfg["field_file"].get<std::string>());
        if (!is) throw Error("cannot read field file");
        const json fj = json::parse(is);
        const std::string key = cfg.value("field_key", std::string());
        const ModeField f = mode_field_from_json(key.empty() ? fj : fj.at(key));
        out["field"] = to_json(norm_report(f, cfg.value("T", 1.0)));
    } else {
        const BPParams p = params_of(cfg);
        const InitialData d = build_initial_data(build_wave_system(p, true), double(p.Q), double(p.r));
        const double T = cfg.value("T", p.T > 0.0 ? p.T : 1.0);
        out["params"] = to_json(p);
        out["u0"] = to_json(norm_report(d.u0, T));
        out["b0"] = to_json(norm_report(d.b0, T));
    }
    write_json(c, "norms.json", out);
}

void audit(const Common& c) {
    const json cfg = load_config(c);
    const BPParams p = params_of(cfg);
    const WaveSystem ws = build_wave_system(p, true);
    const TimeSchedule sch = build_schedule(p, ws);
    json out{{"version", kReportVersion}, {"params", to_json(p)}, {"schedule", to_json(sch)}};
    out["windowed_xT"] = to_json(audit_windowed_xT(p, ws, sch, cfg.value("T", 0.0)));
    if (cfg.value("growth", false)) {
        ScenarioConfig sc = config_from_json(json{{"params", to_json(p)}, {"N", cfg.value("N", 64)}, {"samples", cfg.value("samples", 10)}});
        const ScenarioData d = scenario_data(sc);
        const FirstIteratePair f = first_iterates(d.u0, d.b0);
        const GridShape s = auto_shape(sc.N, {&d.u0, &d.b0, &f.u1, &f.b1});
        SolveOptions so;
        so.T = p.T;
        so.sample_times = sample_times(sc);
        const GridTrajectory tr = solve_grid(sample(d.u0, s), sample(d.b0, s), so);
        out["growth"] = to_json(audit_growth(sample_remainder(decompose(tr, d.u0, d.b0), sc.snapshot_drop), p, ws, sch));
    }
    if (cfg.contains("probe_samples")) {
        const std::uint64_t seed = cfg.value("seed", std::uint64_t{0});
        out["bilinear_probe"] = to_json(probe_bilinear_boundedness(cfg["probe_samples"].get<int>(), seed));
        out["bilinear_probe"]["seed"] = seed;
    }
    write_json(c, "audit.json", out);
}

void experiment(const Common& c) {
    json cfg = load_config(c);
    std::vector<std::int64_t> sweep;
    if (cfg.contains("Q_sweep")) {
        sweep = cfg["Q_sweep"].get<std::vector<std::int64_t>>();
        cfg.erase("Q_sweep");
    }
    const ScenarioConfig sc = config_from_json(cfg);
    if (sweep.empty()) {
        const ScenarioReport r = run_scenario(sc);
        write_report(r, c.out);
        std::cout << (fs::path(c.out) / sc.json_name).string() << (r.pass ? " pass" : " FAIL") << "\n";
        return;
    }
    const InflationSweep s = run_inflation_sweep(sc, sweep);
    for (const auto& r : s.runs) write_report(r, fs::path(c.out) / ("Q" + std::to_string(r.config.params.Q)));
    write_json(c, "sweep.json", to_json(s));
}

void chain(const Common& c) {
    const json cfg = load_config(c);
    const std::vector<double> deltas = cfg.value("deltas", std::vector<double>{0.81, 0.5, 0.25, 0.1, 0.05});
    write_json(c, "chain.json", to_json(parameter_chain_table(deltas, cascade_law_from_string(cfg.value("law", std::string("paper"))))));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Norm-inflation lab for 3D incompressible MHD on the torus"};
    app.require_subcommand(1);
    Common common;
    std::uint64_t seed = 0;
    auto add = [&](const char* name, const char* help, void (*fn)(const Common&)) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", common.config, "JSON config file");
        sub->add_option("--out", common.out, "output directory")->capture_default_str();
        sub->add_option("--seed", seed, "seed, overrides the config");
        sub->callback([&, sub, fn] {
            if (sub->count("--seed") > 0) common.seed = seed;
            fn(common);
        });
    };
    add("build-data", "cascade wave system, checks, schedule and initial data", build_data);
    add("evolve", "Picard iterates (mode engine) or grid solution", evolve);
    add("norms", "Besov, X_T and BMO^-1 norms of the data or of a field file", norms);
    add("audit", "windowed X_T audit, optional growth table and bilinear probe", audit);
    add("experiment", "run a scenario (or a Q sweep) and write CSV + JSON", experiment);
    add("chain", "delta -> (Q, r, T, k0) parameter table", chain);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
