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

// ghzforge command line: compile | simulate | estimate | sweep.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "ghzforge/pipeline.h"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace ghzforge;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kCompile = 3, kAborted = 4 };

void write_file(const fs::path &p, const std::string &content) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot write " + p.string());
    }
    out << content;
}

std::string read_file(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read " + p.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string csv_cell(const nlohmann::ordered_json &v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_null()) return "";
    return v.dump();
}

/// Scalar fields of a report as CSV; reports with an "estimates" list give
/// one row per estimate.
std::string report_csv(const std::string &json_text) {
    const auto j = nlohmann::ordered_json::parse(json_text);
    std::vector<nlohmann::ordered_json> rows;
    if (j.contains("estimates")) {
        for (const auto &e : j["estimates"]) {
            nlohmann::ordered_json row;
            for (const auto &[k, v] : j.items()) {
                if (v.is_primitive()) row[k] = v;
            }
            for (const auto &[k, v] : e.items()) {
                if (v.is_primitive()) row[k] = v;
            }
            rows.push_back(row);
        }
    } else {
        nlohmann::ordered_json row;
        for (const auto &[k, v] : j.items()) {
            if (v.is_primitive()) row[k] = v;
        }
        rows.push_back(row);
    }
    std::string out;
    if (rows.empty()) return out;
    bool first = true;
    for (const auto &[k, v] : rows.front().items()) {
        out += (first ? "" : ",") + k;
        first = false;
    }
    out += '\n';
    for (const auto &row : rows) {
        first = true;
        for (const auto &[k, v] : row.items()) {
            out += (first ? "" : ",") + csv_cell(v);
            first = false;
        }
        out += '\n';
    }
    return out;
}

void write_report(const fs::path &dir, const std::string &stem, const std::string &json_text, ReportFormat f) {
    if (f == ReportFormat::kCsv) {
        write_file(dir / (stem + ".csv"), report_csv(json_text));
    } else {
        write_file(dir / (stem + ".json"), json_text);
    }
}

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("ghzforge");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char *env = std::getenv("GHZFORGE_LOG")) {
        spdlog::set_level(spdlog::level::from_str(env));
    }
}

}  // namespace

int main(int argc, char **argv) {
    setup_logging();
    CLI::App app{"GHZ state compiler, Pauli-frame simulator and fidelity estimator"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> out_dir;
    std::string format = "json";
    app.add_option("--config", config_path, "Pipeline config (JSON)")->required();
    app.add_option("--seed", seed, "Override the global seed");
    app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "csv"}));

    auto *compile = app.add_subcommand("compile", "Compile the GHZ circuit with parity checks");
    auto *simulate = app.add_subcommand("simulate", "Sample noisy shots of a compiled circuit");
    std::string circuit_path;
    simulate->add_option("--circuit", circuit_path, "Circuit file (default: <out>/circuit.json)");
    auto *estimate = app.add_subcommand("estimate", "Estimate fidelity from shots");
    std::string shots_path, calibration_path;
    bool no_postselect = false;
    estimate->add_option("--shots", shots_path, "Shots file (default: <out>/shots.ndjson)");
    estimate->add_option("--calibration", calibration_path, "Readout calibration (default: <out>/calibration.json)");
    estimate->add_flag("--no-postselect", no_postselect, "Use every shot regardless of syndromes");
    auto *sweep = app.add_subcommand("sweep", "Compile, simulate and estimate over a parameter grid");
    for (auto *sub : {compile, simulate, estimate, sweep}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        ConfigOverrides ov;
        ov.seed = seed;
        ov.threads = threads;
        if (out_dir) ov.output_dir = fs::path(*out_dir);
        const PipelineConfig cfg = load_pipeline_config(config_path, ov);
        const ReportFormat fmt = format == "csv" ? ReportFormat::kCsv : ReportFormat::kJson;
        const fs::path out = cfg.output_dir;

        if (compile->parsed()) {
            const HardwareGraph g = load_graph(cfg);
            CompileArtifacts a;
            try {
                a = run_compile(cfg, g);
            } catch (const CompileError &e) {
                spdlog::error("compile failed: {}", e.what());
                return kCompile;
            } catch (const GraphError &e) {
                spdlog::error("compile failed: {}", e.what());
                return kCompile;
            }
            write_file(out / "circuit.json", a.circuit_json);
            write_file(out / "circuit.txt", a.circuit_text);
            write_file(out / "trial_log.csv", a.trial_csv);
            write_report(out, "coverage", a.coverage_json, fmt);
            std::cout << "compiled " << a.result.circuit.n_data << " qubits, " << a.result.checks.size()
                      << " checks, coverage " << a.result.coverage.fraction << "\n";
        } else if (simulate->parsed()) {
            const fs::path cpath = circuit_path.empty() ? out / "circuit.json" : fs::path(circuit_path);
            const Circuit c = parse_circuit_json(read_file(cpath));
            const HardwareGraph g = load_graph(cfg);
            const NoiseModel nm = build_noise(cfg, g);
            const SimulationArtifacts a = run_simulate(cfg, c, nm, true);
            write_file(out / "shots.ndjson", a.shots_ndjson);
            write_file(out / "calibration.json", a.calibration_json);
            write_report(out, "summary", a.summary_json, fmt);
            std::cout << "simulated " << a.batch.shots << " shots, retention " << a.batch.retention() << "\n";
        } else if (estimate->parsed()) {
            const fs::path spath = shots_path.empty() ? out / "shots.ndjson" : fs::path(shots_path);
            const fs::path kpath = calibration_path.empty() ? out / "calibration.json" : fs::path(calibration_path);
            const auto tallies = parse_shots_ndjson(read_file(spath));
            const ReadoutCalibration cal = parse_calibration_json(read_file(kpath));
            EstimationReport rep;
            try {
                rep = run_estimate(cfg, tallies, cal, !no_postselect);
            } catch (const EstimationAborted &e) {
                spdlog::error("estimation aborted: {}", e.what());
                return kAborted;
            }
            write_report(out, "estimate", rep.report_json, fmt);
            if (!rep.signal_csv.empty() && rep.parity) write_file(out / "signal.csv", rep.signal_csv);
            if (rep.dfe) std::cout << "dfe " << rep.dfe->value << " +- " << rep.dfe->std_error << "\n";
            if (rep.parity) std::cout << "parity " << rep.parity->value << " +- " << rep.parity->std_error << "\n";
        } else if (sweep->parsed()) {
            const HardwareGraph g = load_graph(cfg);
            const std::string text = run_sweep(cfg, g, fmt);
            write_file(out / (fmt == ReportFormat::kCsv ? "sweep.csv" : "sweep.json"), text);
            std::cout << "sweep over " << cfg.sweep.values.size() << " points written to " << out.string() << "\n";
        }
    } catch (const ConfigError &e) {
        spdlog::error("config error: {}", e.what());
        return kConfig;
    } catch (const CircuitError &e) {
        spdlog::error("circuit error: {}", e.what());
        return kConfig;
    } catch (const NoiseError &e) {
        spdlog::error("noise error: {}", e.what());
        return kConfig;
    } catch (const EstimationError &e) {
        spdlog::error("estimation error: {}", e.what());
        return kConfig;
    } catch (const std::exception &e) {
        spdlog::error("{}", e.what());
        return kFailure;
    }
    return kOk;
}
