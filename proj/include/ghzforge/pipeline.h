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

#ifndef GHZFORGE_PIPELINE_H_
#define GHZFORGE_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ghzforge/circuit.h"
#include "ghzforge/compiler.h"
#include "ghzforge/estimation.h"
#include "ghzforge/hwgraph.h"
#include "ghzforge/lattices.h"
#include "ghzforge/noise.h"

namespace ghzforge {

inline constexpr const char *kVersion = "0.1.0";

class ConfigError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Raised when too few shots survive post-selection.
class EstimationAborted : public EstimationError {
   public:
    using EstimationError::EstimationError;
};

struct GraphSource {
    /// Graph file, resolved against the config directory. Empty when a
    /// generator is used.
    std::filesystem::path path;
    /// "path", "star", "grid" or "heavy_hex".
    std::string generator;
    int n = 0;
    int rows = 0;
    int cols = 0;
    HeavyHexLayout heavy_hex;
    std::optional<SyntheticRates> rates;
};

struct NoiseConfig {
    /// "uniform" uses the rates below everywhere; "graph" takes per-element
    /// rates from the hardware graph.
    std::string source = "uniform";
    NoiseModel model;
    double scale = 1.0;
};

struct EstimationPlan {
    bool dfe = true;
    bool parity = true;
    int stabilizers = 40;
    size_t shots = 1000;
    size_t population_shots = 4000;
    /// "default" (trex for parities, tensored inverse for populations) or
    /// "none".
    std::string mitigation = "default";
    int hamming_cutoff = -1;
    size_t calibration_shots = 20000;
    bool exact_calibration = false;
    bool twirl_readout = true;
    size_t min_accepted = 1;
    double retention_floor = 0.0;
};

struct SweepPlan {
    /// "noise_scale", "block_probability" or "n_data".
    std::string parameter;
    std::vector<double> values;
};

struct PipelineConfig {
    GraphSource graph;
    std::filesystem::path output_dir = "out";
    uint64_t seed = 1;
    int threads = 1;
    CompileConfig compile;
    NoiseConfig noise;
    EstimationPlan estimation;
    SweepPlan sweep;
    /// FNV-1a of the canonical config JSON after overrides, without
    /// output_dir and threads, as 16 hex digits.
    std::string hash;
};

struct ConfigOverrides {
    std::optional<uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::filesystem::path> output_dir;
};

/// Relative paths resolve against `base_dir`.
PipelineConfig parse_pipeline_config(const std::string &text, const std::filesystem::path &base_dir,
                                     const ConfigOverrides &overrides = {});
PipelineConfig load_pipeline_config(const std::filesystem::path &file, const ConfigOverrides &overrides = {});

uint64_t fnv1a64(const std::string &bytes);

HardwareGraph load_graph(const PipelineConfig &cfg);
NoiseModel build_noise(const PipelineConfig &cfg, const HardwareGraph &g);

struct CompileArtifacts {
    CompileResult result;
    std::string circuit_json;
    std::string circuit_text;
    std::string trial_csv;
    std::string coverage_json;
};

CompileArtifacts run_compile(const PipelineConfig &cfg, const HardwareGraph &g);

/// Z basis first, then the 2N+2 parity grid, then the sampled stabilizer
/// labels, each part present only when its method is configured.
std::vector<MeasurementSetting> plan_settings(const PipelineConfig &cfg, int n_data);

struct SimulationArtifacts {
    ShotBatch batch;
    ReadoutCalibration calibration;
    std::string shots_ndjson;
    std::string summary_json;
    std::string calibration_json;
};

SimulationArtifacts run_simulate(const PipelineConfig &cfg, const Circuit &c, const NoiseModel &nm,
                                 bool keep_records = true);

struct SignalRow {
    int j = 0;
    double phi = 0;
    double raw = 0;
    double mitigated = 0;
    double std_error = 0;
};

struct EstimationReport {
    std::optional<FidelityEstimate> dfe;
    std::optional<FidelityEstimate> parity;
    double retention = 0;
    size_t shots_used = 0;
    std::vector<SignalRow> signal;
    std::string report_json;
    std::string signal_csv;
};

/// With `postselect` false every shot is used regardless of its syndrome.
/// Throws EstimationAborted when a setting has fewer than min_accepted
/// usable shots or the retention is below the floor.
EstimationReport run_estimate(const PipelineConfig &cfg, const std::vector<SettingTally> &tallies,
                              const ReadoutCalibration &cal, bool postselect = true);

std::vector<SettingTally> parse_shots_ndjson(const std::string &text);
std::string shots_to_ndjson(const ShotBatch &batch);
ReadoutCalibration parse_calibration_json(const std::string &text);
std::string calibration_to_json(const ReadoutCalibration &cal);

enum class ReportFormat { kJson, kCsv };

/// One row per grid point; failures are recorded per row.
std::string run_sweep(const PipelineConfig &cfg, const HardwareGraph &g, ReportFormat format);

}  // namespace ghzforge

#endif  // GHZFORGE_PIPELINE_H_
