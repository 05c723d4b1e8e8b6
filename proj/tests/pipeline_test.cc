// Copyright 2026 The ghzforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ghzforge/pipeline.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "json.hpp"

namespace ghzforge {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string &name) {
    const fs::path p = fs::temp_directory_path() / ("ghzforge_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path &p, const std::string &s) { std::ofstream(p, std::ios::binary) << s; }

const char *kP3 = R"({
  "graph": {"generator": "path", "n": 4},
  "seed": 3,
  "compile": {"n_data": 3, "trials": 4},
  "estimation": {"shots": 200, "population_shots": 400, "stabilizers": 8, "calibration_shots": 1000}
})";

const char *kNoisy = R"({
  "graph": {"generator": "grid", "rows": 3, "cols": 4},
  "seed": 5,
  "compile": {"n_data": 9, "trials": 20},
  "noise": {"cnot_error": 0.01, "idle_dephasing": 0.002, "idle_relaxation": 0.002, "readout_flip": 0.01,
            "dd_enabled": true},
  "estimation": {"shots": 1500, "population_shots": 6000, "stabilizers": 30, "calibration_shots": 20000}
})";

int run_cli(const std::string &args) {
    const std::string cmd = std::string(GHZFORGE_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Config, ParsesAndAppliesOverrides) {
    const PipelineConfig cfg = parse_pipeline_config(kP3, "/base", {.seed = 99, .threads = 2, .output_dir = std::nullopt});
    EXPECT_EQ(cfg.seed, 99u);
    EXPECT_EQ(cfg.threads, 2);
    EXPECT_EQ(cfg.compile.n_data, 3);
    EXPECT_EQ(cfg.output_dir, fs::path("/base/out"));
    EXPECT_EQ(cfg.hash.size(), 16u);
    EXPECT_NE(cfg.hash, parse_pipeline_config(kP3, "/base").hash);
    EXPECT_EQ(parse_pipeline_config(kP3, "/base").hash, parse_pipeline_config(kP3, "/elsewhere").hash);
    // Output location and thread count do not change results.
    EXPECT_EQ(parse_pipeline_config(kP3, "/base", {.seed = 99, .threads = 1, .output_dir = "/x"}).hash, cfg.hash);
}

TEST(Config, RejectsBadInput) {
    EXPECT_THROW(parse_pipeline_config("{", "."), ConfigError);
    EXPECT_THROW(parse_pipeline_config(R"({"graph": {"generator": "path", "n": 4}, "colour": 1})", "."), ConfigError);
    EXPECT_THROW(parse_pipeline_config(R"({"seed": 1})", "."), ConfigError);
    EXPECT_THROW(parse_pipeline_config(R"({"graph": {"generator": "torus"}})", "."), ConfigError);
    EXPECT_THROW(parse_pipeline_config(R"({"graph": {"generator": "path", "n": 4}, "noise": {"source": "x"}})", "."),
                 ConfigError);
    EXPECT_THROW(
        parse_pipeline_config(R"({"graph": {"generator": "path", "n": 4}, "estimation": {"mitigation": "m3"}})", "."),
        ConfigError);
    EXPECT_THROW(
        parse_pipeline_config(R"({"graph": {"generator": "path", "n": 4}, "sweep": {"parameter": "colour"}})", "."),
        ConfigError);
    EXPECT_THROW(load_pipeline_config("/nonexistent/config.json"), ConfigError);
}

TEST(Config, MissingGraphFileIsReported) {
    const PipelineConfig cfg = parse_pipeline_config(R"({"graph": {"path": "missing.json"}, "compile": {"n_data": 3}})", "/nonexistent");
    EXPECT_THROW(load_graph(cfg), ConfigError);
}

TEST(Config, Fnv1aKnownValues) {
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Pipeline, PathOfThreeCompilesToTwoCnots) {
    const PipelineConfig cfg = parse_pipeline_config(kP3, ".");
    const CompileArtifacts a = run_compile(cfg, load_graph(cfg));
    int cnots = 0;
    for (const auto &layer : a.result.circuit.layers)
        for (const auto &g : layer) cnots += g.kind == GateKind::kCnot;
    EXPECT_EQ(cnots, 2);
    EXPECT_EQ(a.result.circuit.n_data, 3);
    EXPECT_EQ(parse_circuit_json(a.circuit_json), a.result.circuit);
    EXPECT_EQ(a.trial_csv.substr(0, 5), "trial");
    const auto cov = nlohmann::json::parse(a.coverage_json);
    EXPECT_TRUE(cov.contains("config_hash"));
    EXPECT_TRUE(cov.contains("version"));
}

TEST(Pipeline, NoiselessRunGivesUnitFidelity) {
    const PipelineConfig cfg = parse_pipeline_config(kP3, ".");
    const HardwareGraph g = load_graph(cfg);
    const CompileArtifacts a = run_compile(cfg, g);
    const SimulationArtifacts sim = run_simulate(cfg, a.result.circuit, build_noise(cfg, g));
    EXPECT_EQ(sim.batch.retention(), 1.0);
    const EstimationReport rep = run_estimate(cfg, sim.batch.tallies, sim.calibration);
    ASSERT_TRUE(rep.dfe && rep.parity);
    EXPECT_NEAR(rep.dfe->value, 1.0, 1e-12);
    EXPECT_NEAR(rep.parity->value, 1.0, 3 * rep.parity->std_error + 1e-12);
    EXPECT_TRUE(rep.dfe->verdict_gme());
    const auto j = nlohmann::json::parse(rep.report_json);
    EXPECT_EQ(j["estimates"].size(), 2u);
    EXPECT_TRUE(j["agreement"]["within_2sigma"].get<bool>());
    EXPECT_EQ(rep.signal.size(), 8u);
    EXPECT_EQ(rep.signal_csv.substr(0, rep.signal_csv.find('\n')), "j,phi,raw,mitigated,stderr");
}

TEST(Pipeline, NoisyEstimatesAgreeAndPostselectionHelps) {
    const PipelineConfig cfg = parse_pipeline_config(kNoisy, ".");
    const HardwareGraph g = load_graph(cfg);
    const CompileArtifacts a = run_compile(cfg, g);
    ASSERT_GT(a.result.checks.size(), 0u);
    const SimulationArtifacts sim = run_simulate(cfg, a.result.circuit, build_noise(cfg, g), false);
    EXPECT_GT(sim.batch.retention(), 0.0);
    EXPECT_LT(sim.batch.retention(), 1.0);
    const EstimationReport post = run_estimate(cfg, sim.batch.tallies, sim.calibration, true);
    const EstimationReport all = run_estimate(cfg, sim.batch.tallies, sim.calibration, false);
    EXPECT_LE(std::abs(post.dfe->value - post.parity->value),
              2 * std::hypot(post.dfe->std_error, post.parity->std_error));
    EXPECT_GT(post.parity->value, all.parity->value);
    EXPECT_LT(post.shots_used, all.shots_used);
}

TEST(Pipeline, ShotFileRoundTrip) {
    PipelineConfig cfg = parse_pipeline_config(kNoisy, ".");
    cfg.estimation.shots = 100;
    cfg.estimation.population_shots = 100;
    const HardwareGraph g = load_graph(cfg);
    const CompileArtifacts a = run_compile(cfg, g);
    const SimulationArtifacts sim = run_simulate(cfg, a.result.circuit, build_noise(cfg, g));
    const auto parsed = parse_shots_ndjson(sim.shots_ndjson);
    ASSERT_EQ(parsed.size(), sim.batch.tallies.size());
    for (size_t i = 0; i < parsed.size(); ++i) {
        EXPECT_EQ(parsed[i].shots, sim.batch.tallies[i].shots);
        EXPECT_EQ(parsed[i].accepted, sim.batch.tallies[i].accepted);
        EXPECT_EQ(parsed[i].sum_all, sim.batch.tallies[i].sum_all);
        EXPECT_EQ(parsed[i].counts_accepted, sim.batch.tallies[i].counts_accepted);
        EXPECT_EQ(parsed[i].setting.label, sim.batch.tallies[i].setting.label);
    }
    const ReadoutCalibration cal = parse_calibration_json(sim.calibration_json);
    EXPECT_EQ(cal.eps, sim.calibration.eps);
    EXPECT_EQ(run_estimate(cfg, parsed, cal).report_json, run_estimate(cfg, sim.batch.tallies, cal).report_json);
}

TEST(Pipeline, MalformedShotFilesRejected) {
    EXPECT_THROW(parse_shots_ndjson("{\"setting\": 1"), EstimationError);
    EXPECT_THROW(parse_shots_ndjson(R"({"setting":{"kind":"z_basis"},"syndromes":"1","data":"01","accepted":true})"),
                 EstimationError);
    EXPECT_THROW(parse_shots_ndjson(R"({"setting":{"kind":"parity","phi":0,"j":0},"syndromes":"0","data":3,"accepted":true})"),
                 EstimationError);
    EXPECT_THROW(parse_calibration_json(R"({"eps": [0.5]})"), EstimationError);
}

TEST(Pipeline, ZeroRetentionAbortsEstimation) {
    const PipelineConfig cfg = parse_pipeline_config(kP3, ".");
    SettingTally t;
    t.setting = MeasurementSetting::stabilizer({true, {0, 1}});
    ShotRecord r;
    r.accepted = false;
    r.value = 1;
    for (int i = 0; i < 10; ++i) t.add(r);
    const ReadoutCalibration cal{{0, 0, 0}, {0, 0, 0}};
    EXPECT_THROW(run_estimate(cfg, {t, t}, cal), EstimationAborted);
    PipelineConfig floor = cfg;
    floor.estimation.retention_floor = 0.5;
    EXPECT_THROW(run_estimate(floor, {t, t}, cal), EstimationAborted);
}

TEST(Pipeline, SettingsPlanCoversBothMethods) {
    const PipelineConfig cfg = parse_pipeline_config(kP3, ".");
    const auto s = plan_settings(cfg, 3);
    ASSERT_EQ(s.size(), 1u + 8u + 8u);
    EXPECT_EQ(s[0].kind, SettingKind::kZBasis);
    for (int j = 0; j < 8; ++j) {
        EXPECT_EQ(s[1 + j].kind, SettingKind::kParity);
        EXPECT_EQ(s[1 + j].index, j);
    }
    EXPECT_EQ(s.back().kind, SettingKind::kStabilizer);
}

TEST(Sweep, RowsPerPointAndErrors) {
    PipelineConfig cfg = parse_pipeline_config(kNoisy, ".");
    cfg.estimation.shots = 300;
    cfg.estimation.population_shots = 1000;
    cfg.sweep.parameter = "noise_scale";
    cfg.sweep.values = {0.0, 1.0, 4.0};
    const HardwareGraph g = load_graph(cfg);
    const std::string csv = run_sweep(cfg, g, ReportFormat::kCsv);
    std::istringstream in(csv);
    std::string line;
    std::vector<std::string> rows;
    while (std::getline(in, line)) rows.push_back(line);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0], "parameter,value,seed,coverage,n_checks,retention,F,sigma,F_dfe,sigma_dfe,status");
    for (size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i].substr(rows[i].rfind(',') + 1), "ok");

    const auto j = nlohmann::json::parse(run_sweep(cfg, g, ReportFormat::kJson));
    const auto &pts = j["rows"];
    ASSERT_EQ(pts.size(), 3u);
    for (size_t i = 1; i < pts.size(); ++i) {
        const double prev = pts[i - 1]["F"].get<double>(), cur = pts[i]["F"].get<double>();
        const double sig = std::hypot(pts[i - 1]["sigma"].get<double>(), pts[i]["sigma"].get<double>());
        EXPECT_LE(cur, prev + 2 * sig);
    }

    cfg.sweep.values = {};
    EXPECT_THROW(run_sweep(cfg, g, ReportFormat::kCsv), ConfigError);
}

TEST(Sweep, FailuresAreRecordedPerRow) {
    PipelineConfig cfg = parse_pipeline_config(kP3, ".");
    cfg.sweep.parameter = "n_data";
    cfg.sweep.values = {3, 50};
    const auto j = nlohmann::json::parse(run_sweep(cfg, load_graph(cfg), ReportFormat::kJson));
    ASSERT_EQ(j["rows"].size(), 2u);
    EXPECT_EQ(j["rows"][0]["status"], "ok");
    EXPECT_NE(j["rows"][1]["status"].get<std::string>().find("error"), std::string::npos);
}

TEST(Sweep, BlockingNeverLosesCoverage) {
    PipelineConfig cfg = parse_pipeline_config(R"({
      "graph": {"generator": "heavy_hex"},
      "compile": {"n_data": 60, "trials": 60},
      "estimation": {"shots": 50, "population_shots": 50, "stabilizers": 4, "calibration_shots": 100}
    })", ".");
    cfg.sweep.parameter = "block_probability";
    cfg.sweep.values = {0.0, 0.06};
    const auto j = nlohmann::json::parse(run_sweep(cfg, load_graph(cfg), ReportFormat::kJson));
    EXPECT_GE(j["rows"][1]["coverage"].get<double>(), j["rows"][0]["coverage"].get<double>());
}

TEST(Cli, EndToEndIsDeterministicAndUsesExitCodes) {
    const fs::path dir = scratch("cli");
    spit(dir / "p3.json", kP3);
    const std::string base = "--config " + (dir / "p3.json").string();
    for (const char *out : {"a", "b"}) {
        const std::string o = " --out " + (dir / out).string();
        ASSERT_EQ(run_cli("compile " + base + o), 0);
        ASSERT_EQ(run_cli("simulate " + base + o), 0);
        ASSERT_EQ(run_cli("estimate " + base + o), 0);
    }
    for (const char *f : {"circuit.json", "circuit.txt", "trial_log.csv", "coverage.json", "shots.ndjson",
                          "calibration.json", "summary.json", "estimate.json", "signal.csv"}) {
        ASSERT_TRUE(fs::exists(dir / "a" / f)) << f;
        EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
    }
    const auto est = nlohmann::json::parse(slurp(dir / "a" / "estimate.json"));
    EXPECT_EQ(est["seed"], 3);
    EXPECT_TRUE(est.contains("config_hash"));

    EXPECT_EQ(run_cli("compile " + base + " --format csv --out " + (dir / "c").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "c" / "coverage.csv"));

    // Exit codes.
    EXPECT_EQ(run_cli("compile --config " + (dir / "nope.json").string()), 2);
    spit(dir / "big.json", R"({"graph": {"generator": "path", "n": 4}, "compile": {"n_data": 9}})");
    EXPECT_EQ(run_cli("compile --config " + (dir / "big.json").string() + " --out " + (dir / "d").string()), 3);
    spit(dir / "floor.json", R"({"graph": {"generator": "path", "n": 4}, "compile": {"n_data": 3},
        "estimation": {"retention_floor": 2.0}})");
    EXPECT_EQ(run_cli("estimate --config " + (dir / "floor.json").string() + " --out " + (dir / "a").string()), 4);
    EXPECT_EQ(run_cli("simulate " + base + " --circuit " + (dir / "missing.json").string()), 2);
    EXPECT_NE(run_cli("frobnicate " + base), 0);
}

}  // namespace
}  // namespace ghzforge
