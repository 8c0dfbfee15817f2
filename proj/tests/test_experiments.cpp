#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"

using namespace mhdtest;
namespace fs = std::filesystem;

namespace {

ScenarioConfig small(Scenario s, Engine e = Engine::mode) {
    ScenarioConfig c;
    c.scenario = s;
    c.engine = e;
    c.params.k0_mag = 4;
    c.params.r = 2;
    c.params.T = 0.05;
    c.samples = 5;
    c.N = 16;
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("mhdinf_test_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST(Config, JsonRoundTripRecordsDefaults) {
    ScenarioConfig c = small(Scenario::zero_velocity);
    c.dt = 1e-3;
    c.seed = 7;
    const nlohmann::json j = to_json(c);
    const ScenarioConfig back = config_from_json(j);
    EXPECT_EQ(to_json(back), j);
    EXPECT_TRUE(j.contains("snapshot_drop"));
    EXPECT_EQ(j["params"]["law"], "tempered");
}

TEST(Config, PartialJsonFillsDefaults) {
    const ScenarioConfig c = config_from_json(nlohmann::json::parse(R"({"scenario":"cancellation","params":{"Q":2}})"));
    EXPECT_EQ(c.scenario, Scenario::cancellation);
    EXPECT_EQ(c.params.Q, 2);
    EXPECT_EQ(c.params.r, 2);
    EXPECT_EQ(c.params.k0_mag, 8);
    EXPECT_EQ(c.engine, Engine::grid);
}

TEST(Config, InvalidCombinationsAreRejected) {
    ScenarioConfig c = small(Scenario::inflation, Engine::grid);
    c.params.law = CascadeLaw::paper;
    EXPECT_THROW(validate(c), PreconditionError);
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"scenario":"blowup"})")), PreconditionError);
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"times":[0.0, 2.0]})")), PreconditionError);
}

TEST(Config, SampleTimesIncludeZeroAndHorizon) {
    const ScenarioConfig c = small(Scenario::inflation);
    const std::vector<double> t = sample_times(c);
    ASSERT_EQ(t.size(), 6u);
    EXPECT_EQ(t.front(), 0.0);
    EXPECT_EQ(t.back(), c.params.T);
}

TEST(Data, ScenarioConstraintsHold) {
    const ScenarioData z = scenario_data(small(Scenario::zero_velocity));
    EXPECT_TRUE(z.u0.empty());
    EXPECT_EQ(z.b0.size(), 4u);
    const ScenarioData c = scenario_data(small(Scenario::cancellation));
    EXPECT_EQ(c.u0, c.b0);
    const ScenarioData i = scenario_data(small(Scenario::inflation));
    EXPECT_EQ(i.u0.size(), 2u);
    EXPECT_EQ(i.b0.size(), 2u);
}

TEST(Data, AutoShapeResolvesFirstIterates) {
    const ScenarioData d = scenario_data(small(Scenario::inflation));
    const FirstIteratePair f = first_iterates(d.u0, d.b0);
    const GridShape s = auto_shape(16, {&d.u0, &d.b0, &f.u1, &f.b1});
    for (const ModeField* m : {&d.u0, &d.b0, &f.u1, &f.b1})
        for (const auto& [key, c] : m->modes()) EXPECT_TRUE(s.resolvable(key.k));
    EXPECT_EQ(s.nz, 16);
}

TEST(Scenario, CancellationOnModeEngine) {
    const ScenarioReport r = run_scenario(small(Scenario::cancellation));
    EXPECT_TRUE(r.u1_zero);
    EXPECT_TRUE(r.b1_zero);
    EXPECT_LE(r.final_row().besov_b, r.initial().besov_b);
    EXPECT_TRUE(r.pass) << r.checks.dump();
    for (const auto& row : r.rows) {
        EXPECT_EQ(row.b10_amp, 0.0);
        EXPECT_EQ(row.y_norm, 0.0);
    }
}

TEST(Scenario, CancellationOnGridEngine) {
    ScenarioConfig c = small(Scenario::cancellation, Engine::grid);
    c.params.k0_mag = 2;
    const ScenarioReport r = run_scenario(c);
    ASSERT_TRUE(r.shape.has_value());
    EXPECT_TRUE(r.pass) << r.checks.dump();
    for (double v : r.u_minus_b) EXPECT_LE(v, 1e-10);
}

TEST(Scenario, ZeroVelocityMatchesFirstIterate) {
    const ScenarioReport r = run_scenario(small(Scenario::zero_velocity));
    EXPECT_EQ(r.initial().besov_u, 0.0);
    EXPECT_GT(r.final_row().besov_u, 0.0);
    EXPECT_GT(r.eta_u1_T, 0.0);
    EXPECT_LE(r.checks["eta_mode_rel_diff"].get<double>(), 0.1);
    EXPECT_TRUE(r.pass) << r.checks.dump();
    EXPECT_GT(r.u_ratio(), 1e250);
}

TEST(Scenario, InflationRatioGrowsWithQ) {
    const InflationSweep s = run_inflation_sweep(small(Scenario::inflation), {1, 2});
    ASSERT_EQ(s.runs.size(), 2u);
    EXPECT_TRUE(s.monotone) << s.runs[0].b_ratio() << " " << s.runs[1].b_ratio();
    EXPECT_TRUE(s.u_bounded);
    // b₁,₀ carries the Q² law: the amplitude ratio at T is 4.
    EXPECT_NEAR(s.runs[1].final_row().b10_amp / s.runs[0].final_row().b10_amp, 4.0, 1e-12);
}

TEST(Scenario, PredicatesRecomputableFromSeries) {
    const ScenarioReport r = run_scenario(small(Scenario::inflation));
    double worst = 0.0;
    for (const auto& row : r.rows) worst = std::max(worst, row.besov_u / r.initial().besov_u);
    EXPECT_EQ(r.checks["u_growth_max"].get<double>(), worst);
    const nlohmann::json j = to_json(r);
    EXPECT_EQ(j["ratios"]["b"].get<double>(), j["final"]["besov_b"].get<double>() / j["initial"]["besov_b"].get<double>());
    EXPECT_EQ(j["version"], kReportVersion);
}

TEST(Scenario, StageErrorsNameTheStage) {
    ScenarioConfig c = small(Scenario::inflation);
    c.params.law = CascadeLaw::paper;
    c.params.r = 12;
    try {
        run_scenario(c);
        FAIL();
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage, "build-data");
    }
}

TEST(Report, CsvHeaderAndShortestFloats) {
    EXPECT_EQ(shortest(0.1), "0.1");
    EXPECT_EQ(shortest(1e-300), "1e-300");
    EXPECT_EQ(std::stod(shortest(1.0 / 3.0)), 1.0 / 3.0);
    const ScenarioReport r = run_scenario(small(Scenario::cancellation));
    const std::string csv = to_csv(r);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,sqrt_t_linf_u,sqrt_t_linf_b,besov_u,besov_b,b10_amp,b11_norm,y_norm,z_norm");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
}

TEST(Report, RepeatedRunsAreByteIdentical) {
    const ScenarioConfig c = small(Scenario::inflation);
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    write_report(run_scenario(c), a);
    write_report(run_scenario(c), b);
    EXPECT_EQ(slurp(a / c.csv_name), slurp(b / c.csv_name));
    EXPECT_EQ(slurp(a / c.json_name), slurp(b / c.json_name));
    EXPECT_FALSE(slurp(a / c.json_name).empty());
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Report, FailedWriteLeavesNothing) {
    const fs::path dir = scratch("blocked");
    fs::create_directories(dir);
    ScenarioConfig c = small(Scenario::cancellation);
    c.json_name = "sub/summary.json";  // parent directory missing
    EXPECT_THROW(write_report(run_scenario(c), dir), StageError);
    EXPECT_FALSE(fs::exists(dir / c.csv_name));
    EXPECT_FALSE(fs::exists(dir / (c.csv_name + ".tmp")));
    fs::remove_all(dir);
}

TEST(Chain, QuarterDelta) {
    const auto rows = parameter_chain_table({0.25});
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].Q, 2);
    EXPECT_EQ(rows[0].r, 128);
    EXPECT_DOUBLE_EQ(rows[0].T, 1.0 / 64.0);
    EXPECT_EQ(rows[0].beta, 8);
    EXPECT_TRUE(rows[0].amplitude && rows[0].horizon && rows[0].scale);
}

TEST(Chain, PaperLawMagnitudesAgreeWithWaveSystem) {
    const auto rows = parameter_chain_table({0.25});
    const WaveSystem ws = build_wave_system(resolve_parameters(0.25, CascadeLaw::paper));
    EXPECT_NEAR(rows[0].log2_k1, ws.log2_m[1], 1e-9);
    EXPECT_NEAR(rows[0].log2_kr, ws.log2_m.back(), 1e-6 * ws.log2_m.back());
    EXPECT_DOUBLE_EQ(rows[0].T_beta, std::exp2(-2.0 * ws.log2_m[0]));
}

TEST(Chain, QIsNonIncreasingInDelta) {
    std::vector<double> deltas;
    for (int i = 1; i < 50; ++i) deltas.push_back(i / 50.0);
    const auto rows = parameter_chain_table(deltas);
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LE(rows[i].Q, rows[i - 1].Q);
    EXPECT_EQ(parameter_chain_table({0.81})[0].Q, 2);
    for (const auto& r : rows) EXPECT_TRUE(r.amplitude && r.horizon) << r.delta;
    EXPECT_THROW(parameter_chain_table({1.5}), PreconditionError);
}

TEST(Chain, JsonHasVersionAndRows) {
    const nlohmann::json j = to_json(parameter_chain_table({0.25, 0.5}, CascadeLaw::tempered));
    EXPECT_EQ(j["version"], kReportVersion);
    ASSERT_EQ(j["rows"].size(), 2u);
    EXPECT_EQ(j["rows"][1]["law"], "tempered");
}
