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

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "json.hpp"

namespace ghzforge {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void check_keys(const json &obj, const std::set<std::string> &allowed, const std::string &section) {
    if (!obj.is_object()) {
        throw ConfigError(section + " must be an object");
    }
    for (const auto &[k, v] : obj.items()) {
        if (!allowed.count(k)) {
            throw ConfigError("unknown key '" + k + "' in " + section);
        }
    }
}

template <typename T>
T get_or(const json &obj, const char *key, T fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception &e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

SyntheticRates parse_rates(const json &r) {
    check_keys(r, {"gate_error", "readout_error", "idle_dephasing", "idle_relaxation", "spread", "defect_fraction", "seed"},
               "graph.rates");
    SyntheticRates s;
    s.gate_error = get_or(r, "gate_error", s.gate_error);
    s.readout_error = get_or(r, "readout_error", s.readout_error);
    s.idle_dephasing = get_or(r, "idle_dephasing", s.idle_dephasing);
    s.idle_relaxation = get_or(r, "idle_relaxation", s.idle_relaxation);
    s.spread = get_or(r, "spread", s.spread);
    s.defect_fraction = get_or(r, "defect_fraction", s.defect_fraction);
    s.seed = get_or<uint64_t>(r, "seed", s.seed);
    return s;
}

GraphSource parse_graph_source(const json &j, const std::filesystem::path &base) {
    GraphSource g;
    if (j.is_string()) {
        g.path = base / j.get<std::string>();
        return g;
    }
    check_keys(j, {"path", "generator", "n", "rows", "cols", "layout", "rates"}, "graph");
    if (j.contains("path")) {
        g.path = base / j["path"].get<std::string>();
    } else {
        g.generator = get_or<std::string>(j, "generator", "");
        if (g.generator != "path" && g.generator != "star" && g.generator != "grid" && g.generator != "heavy_hex") {
            throw ConfigError("graph needs a path or one of the generators path, star, grid, heavy_hex");
        }
    }
    g.n = get_or(j, "n", 0);
    g.rows = get_or(j, "rows", 0);
    g.cols = get_or(j, "cols", 0);
    if (j.contains("layout")) {
        const json &l = j["layout"];
        check_keys(l, {"rows", "row_length", "bridge_stride", "even_offset", "odd_offset"}, "graph.layout");
        g.heavy_hex.rows = get_or(l, "rows", g.heavy_hex.rows);
        g.heavy_hex.row_length = get_or(l, "row_length", g.heavy_hex.row_length);
        g.heavy_hex.bridge_stride = get_or(l, "bridge_stride", g.heavy_hex.bridge_stride);
        g.heavy_hex.even_offset = get_or(l, "even_offset", g.heavy_hex.even_offset);
        g.heavy_hex.odd_offset = get_or(l, "odd_offset", g.heavy_hex.odd_offset);
    }
    if (j.contains("rates")) {
        g.rates = parse_rates(j["rates"]);
    }
    return g;
}

std::string hex64(uint64_t v) {
    std::ostringstream o;
    o << std::hex << std::setw(16) << std::setfill('0') << v;
    return o.str();
}

std::string read_file(const std::filesystem::path &p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read " + p.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ordered_json provenance(const PipelineConfig &cfg) {
    ordered_json j;
    j["version"] = kVersion;
    j["config_hash"] = cfg.hash;
    j["seed"] = cfg.seed;
    return j;
}

/// JSON cannot carry infinities; they become null.
ordered_json finite_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

}  // namespace

uint64_t fnv1a64(const std::string &bytes) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

PipelineConfig parse_pipeline_config(const std::string &text, const std::filesystem::path &base_dir,
                                     const ConfigOverrides &overrides) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error &e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(j, {"graph", "output_dir", "seed", "threads", "compile", "noise", "estimation", "sweep"}, "config");
    if (overrides.seed) j["seed"] = *overrides.seed;
    if (overrides.threads) j["threads"] = *overrides.threads;
    if (overrides.output_dir) j["output_dir"] = overrides.output_dir->string();

    PipelineConfig cfg;
    json hashed = j;
    hashed.erase("output_dir");
    hashed.erase("threads");
    cfg.hash = hex64(fnv1a64(hashed.dump()));
    if (!j.contains("graph")) {
        throw ConfigError("config needs a graph");
    }
    cfg.graph = parse_graph_source(j["graph"], base_dir);
    cfg.output_dir = base_dir / get_or<std::string>(j, "output_dir", "out");
    if (overrides.output_dir) cfg.output_dir = *overrides.output_dir;
    cfg.seed = get_or<uint64_t>(j, "seed", 1);
    cfg.threads = get_or(j, "threads", 1);
    if (cfg.threads < 1) {
        throw ConfigError("threads must be at least 1");
    }

    const json comp = j.value("compile", json::object());
    check_keys(comp, {"n_data", "trials", "block_probability", "uncompute", "uncompute_idle_threshold",
                      "uncompute_max_qubits", "weighted_coverage", "dropout"},
               "compile");
    CompileConfig &cc = cfg.compile;
    cc.n_data = get_or(comp, "n_data", 0);
    cc.trials = get_or(comp, "trials", cc.trials);
    cc.block_probability = get_or(comp, "block_probability", cc.block_probability);
    cc.uncompute = get_or(comp, "uncompute", cc.uncompute);
    cc.uncompute_idle_threshold = get_or(comp, "uncompute_idle_threshold", cc.uncompute_idle_threshold);
    cc.uncompute_max_qubits = get_or(comp, "uncompute_max_qubits", cc.uncompute_max_qubits);
    cc.weighted_coverage = get_or(comp, "weighted_coverage", cc.weighted_coverage);
    if (comp.contains("dropout")) {
        const json &d = comp["dropout"];
        check_keys(d, {"max_gate_error", "max_readout_error"}, "compile.dropout");
        cc.dropout.max_gate_error = get_or(d, "max_gate_error", 1.0);
        cc.dropout.max_readout_error = get_or(d, "max_readout_error", 1.0);
    }
    cc.seed = cfg.seed;
    cc.threads = cfg.threads;
    if (cc.n_data < 2) throw ConfigError("compile.n_data must be at least 2");
    if (cc.trials < 1) throw ConfigError("compile.trials must be at least 1");
    if (!(cc.block_probability >= 0 && cc.block_probability < 1)) {
        throw ConfigError("compile.block_probability must lie in [0, 1)");
    }
    if (cc.uncompute_idle_threshold < 1) throw ConfigError("compile.uncompute_idle_threshold must be at least 1");
    for (double t : {cc.dropout.max_gate_error, cc.dropout.max_readout_error}) {
        if (!(t >= 0 && t <= 1)) throw ConfigError("dropout thresholds must lie in [0, 1]");
    }

    const json noise = j.value("noise", json::object());
    check_keys(noise, {"source", "cnot_error", "idle_dephasing", "idle_relaxation", "readout_flip", "dd_enabled",
                       "dd_residual", "ground_relaxation_residual", "scale"},
               "noise");
    NoiseConfig &nc = cfg.noise;
    nc.source = get_or<std::string>(noise, "source", nc.source);
    if (nc.source != "uniform" && nc.source != "graph") {
        throw ConfigError("noise.source must be 'uniform' or 'graph'");
    }
    NoiseModel &nm = nc.model;
    nm.cnot_error = get_or(noise, "cnot_error", 0.0);
    nm.idle_dephasing = get_or(noise, "idle_dephasing", 0.0);
    nm.idle_relaxation = get_or(noise, "idle_relaxation", 0.0);
    nm.readout_flip = get_or(noise, "readout_flip", 0.0);
    nm.dd_enabled = get_or(noise, "dd_enabled", false);
    nm.dd_residual = get_or(noise, "dd_residual", nm.dd_residual);
    nm.ground_relaxation_residual = get_or(noise, "ground_relaxation_residual", 0.0);
    nc.scale = get_or(noise, "scale", 1.0);
    if (!(nc.scale >= 0)) throw ConfigError("noise.scale must be non-negative");
    try {
        nm.validate();
    } catch (const NoiseError &e) {
        throw ConfigError(std::string("noise: ") + e.what());
    }

    const json est = j.value("estimation", json::object());
    check_keys(est, {"methods", "stabilizers", "shots", "population_shots", "mitigation", "hamming_cutoff",
                     "calibration_shots", "exact_calibration", "twirl_readout", "min_accepted", "retention_floor"},
               "estimation");
    EstimationPlan &ep = cfg.estimation;
    if (est.contains("methods")) {
        const auto methods = get_or<std::vector<std::string>>(est, "methods", {});
        ep.dfe = ep.parity = false;
        for (const auto &m : methods) {
            if (m == "dfe") {
                ep.dfe = true;
            } else if (m == "parity") {
                ep.parity = true;
            } else {
                throw ConfigError("unknown estimation method '" + m + "'");
            }
        }
    }
    ep.stabilizers = get_or(est, "stabilizers", ep.stabilizers);
    ep.shots = get_or(est, "shots", ep.shots);
    ep.population_shots = get_or(est, "population_shots", ep.population_shots);
    ep.mitigation = get_or(est, "mitigation", ep.mitigation);
    ep.hamming_cutoff = get_or(est, "hamming_cutoff", ep.hamming_cutoff);
    ep.calibration_shots = get_or(est, "calibration_shots", ep.calibration_shots);
    ep.exact_calibration = get_or(est, "exact_calibration", ep.exact_calibration);
    ep.twirl_readout = get_or(est, "twirl_readout", ep.twirl_readout);
    ep.min_accepted = get_or(est, "min_accepted", ep.min_accepted);
    ep.retention_floor = get_or(est, "retention_floor", ep.retention_floor);
    if (ep.mitigation != "default" && ep.mitigation != "none") {
        throw ConfigError("estimation.mitigation must be 'default' or 'none'");
    }
    if (ep.dfe && ep.stabilizers < 2) throw ConfigError("estimation.stabilizers must be at least 2");
    if (ep.shots == 0 || (ep.parity && ep.population_shots == 0)) throw ConfigError("shot counts must be positive");
    if (!ep.exact_calibration && ep.calibration_shots == 0) throw ConfigError("calibration_shots must be positive");

    if (j.contains("sweep")) {
        const json &s = j["sweep"];
        check_keys(s, {"parameter", "values"}, "sweep");
        cfg.sweep.parameter = get_or<std::string>(s, "parameter", "");
        cfg.sweep.values = get_or<std::vector<double>>(s, "values", {});
        if (cfg.sweep.parameter != "noise_scale" && cfg.sweep.parameter != "block_probability" &&
            cfg.sweep.parameter != "n_data") {
            throw ConfigError("sweep.parameter must be noise_scale, block_probability or n_data");
        }
    }
    return cfg;
}

PipelineConfig load_pipeline_config(const std::filesystem::path &file, const ConfigOverrides &overrides) {
    return parse_pipeline_config(read_file(file), file.parent_path(), overrides);
}

HardwareGraph load_graph(const PipelineConfig &cfg) {
    const GraphSource &s = cfg.graph;
    HardwareGraph g;
    try {
        if (!s.path.empty()) {
            g = parse_hardware_graph(read_file(s.path));
        } else if (s.generator == "path") {
            g = path_graph(s.n);
        } else if (s.generator == "star") {
            g = star_graph(s.n);
        } else if (s.generator == "grid") {
            g = grid_graph(s.rows, s.cols);
        } else {
            g = heavy_hex_graph(s.heavy_hex);
        }
    } catch (const GraphError &e) {
        throw ConfigError(std::string("graph: ") + e.what());
    }
    if (s.rates) {
        g = with_synthetic_rates(g, *s.rates);
    }
    return g;
}

NoiseModel build_noise(const PipelineConfig &cfg, const HardwareGraph &g) {
    NoiseModel nm = cfg.noise.model;
    if (cfg.noise.source == "graph") {
        NoiseModel from = noise_from_graph(g, nm.dd_enabled);
        from.dd_residual = nm.dd_residual;
        from.ground_relaxation_residual = nm.ground_relaxation_residual;
        from.cnot_error = nm.cnot_error;
        from.idle_dephasing = nm.idle_dephasing;
        from.idle_relaxation = nm.idle_relaxation;
        from.readout_flip = nm.readout_flip;
        nm = std::move(from);
    }
    return cfg.noise.scale == 1.0 ? nm : scale_noise(nm, cfg.noise.scale);
}

CompileArtifacts run_compile(const PipelineConfig &cfg, const HardwareGraph &g) {
    CompileArtifacts a;
    a.result = randomized_compile(g, cfg.compile);
    const CompileResult &r = a.result;
    a.circuit_json = emit_circuit(r.circuit, CircuitFormat::kCanonicalJson);
    a.circuit_text = emit_circuit(r.circuit, CircuitFormat::kQasmText);
    a.trial_csv = trial_log_csv(r.trial_log);

    ordered_json j = provenance(cfg);
    j["n_data"] = r.circuit.n_data;
    j["root"] = r.root;
    j["best_trial"] = r.best_trial;
    j["n_checks"] = r.checks.size();
    ordered_json checks = ordered_json::array();
    for (const auto &c : r.checks) {
        checks.push_back({{"ancilla", c.ancilla}, {"i", c.i}, {"j", c.j}, {"region_size", c.region.size()}});
    }
    j["checks"] = checks;
    j["covered"] = r.coverage.covered;
    j["total"] = r.coverage.total;
    j["fraction"] = r.coverage.fraction;
    if (r.coverage.weighted_fraction) j["weighted_fraction"] = *r.coverage.weighted_fraction;
    j["search_fraction"] = r.search_coverage.fraction;
    j["uncomputed"] = r.uncomputed;
    const DepthStats d = depth_stats(r.circuit);
    j["depth"] = {{"total", d.total_depth}, {"cnot", d.cnot_depth}, {"prep_cnot", d.prep_cnot_depth}};
    a.coverage_json = j.dump(2) + "\n";
    return a;
}

std::vector<MeasurementSetting> plan_settings(const PipelineConfig &cfg, int n_data) {
    std::vector<MeasurementSetting> s;
    const EstimationPlan &ep = cfg.estimation;
    if (ep.parity) {
        s.push_back(MeasurementSetting::z_basis());
        const auto grid = ParityOscillationSignal::grid(n_data);
        for (size_t j = 0; j < grid.size(); ++j) {
            s.push_back(MeasurementSetting::parity(grid[j], static_cast<int>(j)));
        }
    }
    if (ep.dfe) {
        Rng rng(derive_seed(cfg.seed, Stream::kLabels, 0));
        for (int m = 0; m < ep.stabilizers; ++m) {
            s.push_back(MeasurementSetting::stabilizer(sample_stabilizer_uniform(n_data, rng)));
        }
    }
    return s;
}

namespace {

ordered_json setting_json(const MeasurementSetting &s) {
    ordered_json j;
    switch (s.kind) {
        case SettingKind::kZBasis:
            j["kind"] = "z_basis";
            break;
        case SettingKind::kParity:
            j["kind"] = "parity";
            j["phi"] = s.phi;
            j["j"] = s.index;
            break;
        case SettingKind::kStabilizer:
            j["kind"] = "stabilizer";
            j["x_part"] = s.label.x_part;
            j["support"] = s.label.support;
            break;
    }
    return j;
}

MeasurementSetting setting_from_json(const json &j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "z_basis") return MeasurementSetting::z_basis();
    if (kind == "parity") return MeasurementSetting::parity(j.at("phi").get<double>(), j.value("j", -1));
    if (kind == "stabilizer") {
        StabilizerLabel l;
        l.x_part = j.at("x_part").get<bool>();
        l.support = j.at("support").get<std::vector<int>>();
        if (l.support.size() % 2) throw EstimationError("stabilizer support must have even cardinality");
        return MeasurementSetting::stabilizer(l);
    }
    throw EstimationError("unknown setting kind '" + kind + "'");
}

std::string syndrome_hex(const boost::dynamic_bitset<> &s) {
    const size_t digits = std::max<size_t>(1, (s.size() + 3) / 4);
    std::string out(digits, '0');
    for (size_t d = 0; d < digits; ++d) {
        int v = 0;
        for (size_t b = 0; b < 4; ++b) {
            const size_t k = 4 * d + b;
            if (k < s.size() && s[k]) v |= 1 << b;
        }
        out[digits - 1 - d] = "0123456789abcdef"[v];
    }
    return out;
}

bool hex_is_zero(const std::string &h) { return h.find_first_not_of('0') == std::string::npos; }

}  // namespace

std::string shots_to_ndjson(const ShotBatch &batch) {
    std::vector<std::string> setting_text;
    for (const auto &t : batch.tallies) setting_text.push_back(setting_json(t.setting).dump());
    std::string out;
    for (const auto &r : batch.records) {
        out += "{\"setting\":";
        out += setting_text.at(static_cast<size_t>(r.setting));
        out += ",\"syndromes\":\"" + syndrome_hex(r.syndromes) + "\",\"data\":";
        if (batch.tallies[r.setting].setting.kind == SettingKind::kZBasis) {
            out += '"';
            for (size_t k = 0; k < r.bits.size(); ++k) out += r.bits[k] ? '1' : '0';
            out += '"';
        } else {
            out += r.value > 0 ? "1" : "-1";
        }
        out += ",\"accepted\":";
        out += r.accepted ? "true" : "false";
        out += "}\n";
    }
    return out;
}

std::vector<SettingTally> parse_shots_ndjson(const std::string &text) {
    std::vector<SettingTally> tallies;
    std::map<std::string, size_t> index;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
            const std::string key = j.at("setting").dump();
            auto it = index.find(key);
            if (it == index.end()) {
                it = index.emplace(key, tallies.size()).first;
                tallies.emplace_back();
                tallies.back().setting = setting_from_json(j["setting"]);
            }
            SettingTally &t = tallies[it->second];
            ShotRecord r;
            r.accepted = j.at("accepted").get<bool>();
            if (r.accepted != hex_is_zero(j.at("syndromes").get<std::string>())) {
                throw EstimationError("accepted flag disagrees with syndromes");
            }
            const json &d = j.at("data");
            if (t.setting.kind == SettingKind::kZBasis) {
                const auto bits = d.get<std::string>();
                r.bits.resize(bits.size());
                for (size_t k = 0; k < bits.size(); ++k) {
                    if (bits[k] != '0' && bits[k] != '1') throw EstimationError("bad bitstring");
                    r.bits[k] = bits[k] == '1';
                }
            } else {
                r.value = d.get<int>();
                if (r.value != 1 && r.value != -1) throw EstimationError("parity outcome must be 1 or -1");
            }
            t.add(r);
        } catch (const json::exception &e) {
            throw EstimationError("shots line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return tallies;
}

std::string calibration_to_json(const ReadoutCalibration &cal) {
    ordered_json j;
    j["eps"] = cal.eps;
    j["eps_stderr"] = cal.eps_stderr;
    j["baseline"] = cal.baseline();
    return j.dump(2) + "\n";
}

ReadoutCalibration parse_calibration_json(const std::string &text) {
    try {
        const json j = json::parse(text);
        ReadoutCalibration cal;
        cal.eps = j.at("eps").get<std::vector<double>>();
        cal.eps_stderr = j.value("eps_stderr", std::vector<double>(cal.eps.size(), 0.0));
        for (double e : cal.eps) {
            if (!(e >= 0 && e < 0.5)) throw EstimationError("calibration eps must lie in [0, 0.5)");
        }
        return cal;
    } catch (const json::exception &e) {
        throw EstimationError(std::string("calibration: ") + e.what());
    }
}

SimulationArtifacts run_simulate(const PipelineConfig &cfg, const Circuit &c, const NoiseModel &nm, bool keep_records) {
    SimulationArtifacts a;
    const auto settings = plan_settings(cfg, c.n_data);
    std::vector<size_t> shots;
    for (const auto &s : settings) {
        shots.push_back(s.kind == SettingKind::kZBasis ? cfg.estimation.population_shots : cfg.estimation.shots);
    }
    const FrameSampler sampler(c, nm);
    RunOptions opt;
    opt.seed = cfg.seed;
    opt.threads = cfg.threads;
    opt.keep_records = keep_records;
    opt.twirl_readout = cfg.estimation.twirl_readout;
    a.batch = run_shots(sampler, settings, shots, opt);
    a.calibration = cfg.estimation.exact_calibration
                        ? exact_calibration(nm, c.data_qubits())
                        : calibrate_readout(nm, c.data_qubits(), cfg.estimation.calibration_shots, cfg.seed);
    if (keep_records) {
        a.shots_ndjson = shots_to_ndjson(a.batch);
    }
    ordered_json j = provenance(cfg);
    const double n = static_cast<double>(a.batch.shots);
    const double p = a.batch.retention();
    j["shots"] = a.batch.shots;
    j["accepted"] = a.batch.accepted;
    j["retention"] = p;
    if (n > 0) {
        const double z = 1.96;
        const double denom = 1 + z * z / n;
        const double center = (p + z * z / (2 * n)) / denom;
        const double half = z * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom;
        j["retention_wilson95"] = {center - half, center + half};
    }
    j["settings"] = settings.size();
    j["n_data"] = c.n_data;
    j["n_checks"] = c.ancillas.size();
    a.summary_json = j.dump(2) + "\n";
    a.calibration_json = calibration_to_json(a.calibration);
    return a;
}

namespace {

ordered_json estimate_json(const FidelityEstimate &f, double retention, size_t shots_used) {
    ordered_json j;
    j["method"] = to_string(f.method);
    j["mitigation"] = to_string(f.mitigation);
    j["value"] = f.value;
    j["std_error"] = f.std_error;
    if (f.components) {
        const auto &c = *f.components;
        j["components"] = {{"P", c.P},
                           {"P_std_error", c.P_err},
                           {"chi", c.chi},
                           {"chi_std_error", c.chi_err},
                           {"C", c.C},
                           {"theta", c.theta},
                           {"I_N", {c.I_N.real(), c.I_N.imag()}},
                           {"I_minusN", {c.I_minusN.real(), c.I_minusN.imag()}},
                           {"rotated_fidelity", c.rotated_fidelity}};
    }
    j["retention"] = retention;
    j["shots_used"] = shots_used;
    j["verdict_gme"] = f.verdict_gme();
    j["margin_sigma"] = finite_or_null(f.margin_sigma());
    return j;
}

}  // namespace

EstimationReport run_estimate(const PipelineConfig &cfg, const std::vector<SettingTally> &tallies,
                              const ReadoutCalibration &cal, bool postselect) {
    const EstimationPlan &ep = cfg.estimation;
    const bool mitigate = ep.mitigation != "none";
    const int n = static_cast<int>(cal.eps.size());
    if (n < 2) {
        throw EstimationError("calibration must cover at least two data qubits");
    }
    std::vector<int> all(n);
    for (int k = 0; k < n; ++k) all[k] = k;

    EstimationReport rep;
    size_t shots = 0, accepted = 0;
    for (const auto &t : tallies) {
        shots += t.shots;
        accepted += t.accepted;
    }
    if (shots == 0) {
        throw EstimationAborted("no shots to estimate from");
    }
    rep.retention = static_cast<double>(accepted) / static_cast<double>(shots);
    if (postselect && rep.retention < ep.retention_floor) {
        throw EstimationAborted("retention " + std::to_string(rep.retention) + " is below the floor " +
                                std::to_string(ep.retention_floor));
    }
    const size_t need = std::max<size_t>(1, ep.min_accepted);
    for (const auto &t : tallies) {
        const size_t usable = postselect ? t.accepted : t.shots;
        if (usable < need) {
            throw EstimationAborted("a setting kept " + std::to_string(usable) + " of " + std::to_string(t.shots) +
                                    " shots (retention " + std::to_string(rep.retention) + "), need " +
                                    std::to_string(need));
        }
        rep.shots_used += usable;
    }
    auto sum_of = [&](const SettingTally &t) { return postselect ? t.sum_accepted : t.sum_all; };
    auto count_of = [&](const SettingTally &t) { return postselect ? t.accepted : t.shots; };

    if (ep.dfe) {
        std::vector<MeanVar> labels;
        for (const auto &t : tallies) {
            if (t.setting.kind != SettingKind::kStabilizer) continue;
            MeanVar mv = stabilizer_expectation(sum_of(t), count_of(t), t.setting.label.sign());
            if (mitigate) {
                mv = trex_mitigate(mv, cal, t.setting.label.x_part ? all : t.setting.label.support);
            }
            labels.push_back(mv);
        }
        if (labels.size() < 2) {
            throw EstimationError("DFE needs shots for at least two stabilizer labels");
        }
        rep.dfe = dfe_fidelity(labels, mitigate ? Mitigation::kTrex : Mitigation::kNone);
    }
    if (ep.parity) {
        const SettingTally *z = nullptr;
        std::map<int, const SettingTally *> grid;
        for (const auto &t : tallies) {
            if (t.setting.kind == SettingKind::kZBasis) z = &t;
            if (t.setting.kind == SettingKind::kParity) grid[t.setting.index] = &t;
        }
        const auto angles = ParityOscillationSignal::grid(n);
        if (!z || grid.size() != angles.size() || grid.begin()->first != 0 ||
            grid.rbegin()->first != static_cast<int>(angles.size()) - 1) {
            throw EstimationError("parity estimation needs Z-basis shots and all " + std::to_string(angles.size()) +
                                  " grid settings");
        }
        ParityOscillationSignal sig;
        sig.n = n;
        sig.angles = angles;
        for (const auto &[j, t] : grid) {
            const MeanVar raw = stabilizer_expectation(sum_of(*t), count_of(*t), 1);
            const MeanVar mit = mitigate ? trex_mitigate(raw, cal, all) : raw;
            sig.values.push_back(mit.mean);
            sig.std_errors.push_back(std::sqrt(mit.variance));
            rep.signal.push_back({j, t->setting.phi, raw.mean, mit.mean, std::sqrt(mit.variance)});
        }
        const FourierResult fr = fourier_components(sig);
        const auto &counts = postselect ? z->counts_accepted : z->counts_all;
        const Estimate P = population(counts, mitigate ? &cal : nullptr, ep.hamming_cutoff);
        rep.parity = combine_fidelity(P, {fr.chi, fr.chi_err}, fr, mitigate ? Mitigation::kTrex : Mitigation::kNone);
    }

    ordered_json j = provenance(cfg);
    j["postselected"] = postselect;
    j["retention"] = rep.retention;
    j["shots_used"] = rep.shots_used;
    j["population_mitigation"] = mitigate ? "tensored_inverse" : "none";
    ordered_json list = ordered_json::array();
    if (rep.dfe) list.push_back(estimate_json(*rep.dfe, rep.retention, rep.shots_used));
    if (rep.parity) list.push_back(estimate_json(*rep.parity, rep.retention, rep.shots_used));
    j["estimates"] = list;
    if (rep.dfe && rep.parity) {
        const double diff = rep.dfe->value - rep.parity->value;
        const double sigma = std::hypot(rep.dfe->std_error, rep.parity->std_error);
        j["agreement"] = {{"difference", diff},
                          {"sigma_combined", sigma},
                          {"z", finite_or_null(sigma > 0 ? diff / sigma : (diff == 0 ? 0.0 : INFINITY))},
                          {"within_2sigma", std::abs(diff) <= 2 * sigma}};
    }
    rep.report_json = j.dump(2) + "\n";

    std::ostringstream csv;
    csv << std::setprecision(12);
    csv << "j,phi,raw,mitigated,stderr\n";
    for (const auto &r : rep.signal) {
        csv << r.j << ',' << r.phi << ',' << r.raw << ',' << r.mitigated << ',' << r.std_error << '\n';
    }
    rep.signal_csv = csv.str();
    return rep;
}

namespace {

std::string csv_field(const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

}  // namespace

std::string run_sweep(const PipelineConfig &cfg, const HardwareGraph &g, ReportFormat format) {
    if (cfg.sweep.values.empty()) {
        throw ConfigError("sweep grid is empty");
    }
    ordered_json rows = ordered_json::array();
    std::ostringstream csv;
    csv << std::setprecision(12);
    csv << "parameter,value,seed,coverage,n_checks,retention,F,sigma,F_dfe,sigma_dfe,status\n";
    for (size_t i = 0; i < cfg.sweep.values.size(); ++i) {
        const double v = cfg.sweep.values[i];
        PipelineConfig pc = cfg;
        if (cfg.sweep.parameter == "noise_scale") {
            pc.noise.scale = v;
        } else if (cfg.sweep.parameter == "block_probability") {
            pc.compile.block_probability = v;
        } else {
            pc.compile.n_data = static_cast<int>(std::lround(v));
        }
        const uint64_t point_seed = derive_seed(cfg.seed, Stream::kSweep, i);
        ordered_json row;
        row["parameter"] = cfg.sweep.parameter;
        row["value"] = v;
        row["seed"] = point_seed;
        std::string status = "ok";
        std::optional<CoverageReport> cover;
        size_t n_checks = 0;
        std::optional<double> retention;
        std::optional<FidelityEstimate> primary, dfe;
        try {
            if (!(pc.compile.block_probability >= 0 && pc.compile.block_probability < 1)) {
                throw ConfigError("block_probability must lie in [0, 1)");
            }
            if (pc.compile.n_data < 2) {
                throw ConfigError("n_data must be at least 2");
            }
            const CompileResult cr = randomized_compile(g, pc.compile);
            cover = cr.coverage;
            n_checks = cr.checks.size();
            pc.seed = point_seed;
            const NoiseModel nm = build_noise(pc, g);
            const SimulationArtifacts sim = run_simulate(pc, cr.circuit, nm, false);
            retention = sim.batch.retention();
            const EstimationReport rep = run_estimate(pc, sim.batch.tallies, sim.calibration);
            primary = rep.parity ? rep.parity : rep.dfe;
            dfe = rep.dfe;
        } catch (const std::exception &e) {
            status = std::string("error: ") + e.what();
            spdlog::warn("sweep point {} failed: {}", i, e.what());
        }
        auto fmt = [](std::optional<double> x) {
            if (!x) return std::string();
            std::ostringstream o;
            o << std::setprecision(12) << *x;
            return o.str();
        };
        csv << cfg.sweep.parameter << ',' << fmt(v) << ',' << point_seed << ','
            << fmt(cover ? std::optional<double>(cover->fraction) : std::nullopt) << ','
            << (cover ? std::to_string(n_checks) : "") << ',' << fmt(retention) << ','
            << fmt(primary ? std::optional<double>(primary->value) : std::nullopt) << ','
            << fmt(primary ? std::optional<double>(primary->std_error) : std::nullopt) << ','
            << fmt(dfe ? std::optional<double>(dfe->value) : std::nullopt) << ','
            << fmt(dfe ? std::optional<double>(dfe->std_error) : std::nullopt) << ',' << csv_field(status) << '\n';
        row["coverage"] = cover ? ordered_json(cover->fraction) : ordered_json(nullptr);
        row["n_checks"] = cover ? ordered_json(n_checks) : ordered_json(nullptr);
        row["retention"] = retention ? ordered_json(*retention) : ordered_json(nullptr);
        row["F"] = primary ? ordered_json(primary->value) : ordered_json(nullptr);
        row["sigma"] = primary ? ordered_json(primary->std_error) : ordered_json(nullptr);
        row["F_dfe"] = dfe ? ordered_json(dfe->value) : ordered_json(nullptr);
        row["sigma_dfe"] = dfe ? ordered_json(dfe->std_error) : ordered_json(nullptr);
        row["status"] = status;
        rows.push_back(row);
    }
    if (format == ReportFormat::kCsv) {
        return csv.str();
    }
    ordered_json j = provenance(cfg);
    j["rows"] = rows;
    return j.dump(2) + "\n";
}

}  // namespace ghzforge
