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

#ifndef GHZFORGE_NOISE_H_
#define GHZFORGE_NOISE_H_

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "ghzforge/circuit.h"
#include "ghzforge/hwgraph.h"
#include "ghzforge/rng.h"
#include "ghzforge/stabilizer.h"

namespace ghzforge {

class NoiseError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Stochastic Pauli noise. Uniform rates apply unless a per-edge or per-qubit
/// override is present.
struct NoiseModel {
    /// Probability that a two-qubit gate is followed by one of the 15
    /// non-identity two-qubit Paulis, uniformly.
    double cnot_error = 0;
    double idle_dephasing = 0;
    double idle_relaxation = 0;
    double readout_flip = 0;
    bool dd_enabled = false;
    /// Factor applied to idle dephasing when dd_enabled.
    double dd_residual = 0.05;
    /// Relaxation probability per layer for a qubit inside a ground span.
    double ground_relaxation_residual = 0;

    std::map<std::pair<int, int>, double> edge_cnot_error;
    std::map<int, double> qubit_dephasing;
    std::map<int, double> qubit_relaxation;
    std::map<int, double> qubit_readout;

    double cnot_rate(int a, int b) const;
    /// Includes the DD residual.
    double dephasing(int q) const;
    double relaxation(int q) const;
    double readout(int q) const;

    /// Throws NoiseError when any probability is outside [0, 1].
    void validate() const;
};

/// Per-edge and per-qubit rates taken from the graph's calibration.
NoiseModel noise_from_graph(const HardwareGraph &g, bool dd_enabled = true);

/// Every probability multiplied by `factor` and clamped to [0, 1].
NoiseModel scale_noise(const NoiseModel &nm, double factor);

/// Pauli X^x Z^z, phase dropped. Bit k refers to position k of
/// Circuit::all_qubits().
struct PauliFrame {
    boost::dynamic_bitset<> x;
    boost::dynamic_bitset<> z;

    PauliFrame() = default;
    explicit PauliFrame(size_t n) : x(n), z(n) {}

    bool is_identity() const { return x.none() && z.none(); }
    PauliFrame &operator^=(const PauliFrame &o) {
        x ^= o.x;
        z ^= o.z;
        return *this;
    }
    bool operator==(const PauliFrame &) const = default;
};

enum class Pauli : uint8_t { kI = 0, kX = 1, kZ = 2, kY = 3 };

/// Pauli `p` on qubit q right after layer t, conjugated through every later
/// layer of `c` up to the final measurements.
PauliFrame propagate_fault(const Circuit &c, int q, int layer, Pauli p);

enum class SettingKind { kZBasis, kParity, kStabilizer };

struct MeasurementSetting {
    SettingKind kind = SettingKind::kZBasis;
    /// Parity angle; unused otherwise.
    double phi = 0;
    /// Grid index of a parity setting, -1 when not on a grid.
    int index = -1;
    StabilizerLabel label;

    static MeasurementSetting z_basis() { return {}; }
    static MeasurementSetting parity(double phi, int index = -1) { return {SettingKind::kParity, phi, index, {}}; }
    static MeasurementSetting stabilizer(StabilizerLabel l) { return {SettingKind::kStabilizer, 0, -1, std::move(l)}; }
};

struct ShotRecord {
    int setting = 0;
    /// One bit per check, ancilla-ascending.
    boost::dynamic_bitset<> syndromes;
    /// Z-basis data bits in data-position order; empty for ±1 settings.
    boost::dynamic_bitset<> bits;
    /// Raw ±1 outcome for parity and stabilizer settings, 0 for Z-basis.
    int value = 0;
    bool accepted = true;
};

/// Aggregated outcomes of one setting.
struct SettingTally {
    MeasurementSetting setting;
    size_t shots = 0;
    size_t accepted = 0;
    /// Sum of raw ±1 values over all shots and over accepted shots.
    long long sum_all = 0;
    long long sum_accepted = 0;
    /// Z-basis bitstrings (bit k = data position k, printed left to right).
    std::map<std::string, size_t> counts_all;
    std::map<std::string, size_t> counts_accepted;

    void add(const ShotRecord &r);
};

struct ShotBatch {
    std::vector<SettingTally> tallies;
    std::vector<ShotRecord> records;
    size_t shots = 0;
    size_t accepted = 0;

    double retention() const { return shots ? static_cast<double>(accepted) / static_cast<double>(shots) : 0.0; }
};

/// Precomputed fault sites and their propagated effects for one circuit.
class FrameSampler {
   public:
    FrameSampler(const Circuit &c, const NoiseModel &nm);

    const Circuit &circuit() const { return circuit_; }
    size_t num_qubits() const { return qubits_.size(); }
    size_t num_sites() const { return sites_.size(); }
    int num_data() const { return n_data_; }

    /// One noisy execution of the circuit's Clifford part.
    PauliFrame sample_frame(Rng &rng) const;
    /// Syndrome bits from the frame's X part on the ancillas, with ancilla
    /// readout flips.
    boost::dynamic_bitset<> check_syndromes(const PauliFrame &frame, Rng &rng) const;
    /// Fills bits or value of `out` for `setting`. With `twirl`, a random
    /// bit flip is applied before readout and undone in software.
    void sample_data_outcome(const PauliFrame &frame, const MeasurementSetting &setting, Rng &rng, ShotRecord &out,
                             bool twirl = false) const;
    /// Noise-free ±1 expectation of the setting's observable given `frame`.
    double frame_expectation(const PauliFrame &frame, const MeasurementSetting &setting) const;

   private:
    struct Site {
        int k0;
        int k1;  // -1 for single-qubit sites
        double p_gate;
        double p_x;
        double p_z;
        int layer;
    };

    Circuit circuit_;
    NoiseModel noise_;
    std::vector<int> qubits_;
    int n_data_ = 0;
    std::vector<Site> sites_;
    /// Effects of X and Z on qubit index k right after each layer:
    /// effect_[(layer * nq + k) * 2 + {0: X, 1: Z}].
    std::vector<PauliFrame> effect_;
    boost::dynamic_bitset<> data_mask_;
    std::vector<double> data_readout_;
    std::vector<double> ancilla_readout_;
    double parity_flip_all_ = 0;
};

struct RunOptions {
    uint64_t seed = 0;
    int threads = 1;
    bool keep_records = false;
    /// Random bit twirl before readout with sign bookkeeping.
    bool twirl_readout = false;
};

/// `shots` independent executions per setting. Shot s of setting i draws
/// from substream derive_seed(derive_seed(seed, kShot, i), kShot, s).
ShotBatch run_shots(const Circuit &c, const NoiseModel &nm, const std::vector<MeasurementSetting> &settings,
                    size_t shots, const RunOptions &opt);
ShotBatch run_shots(const FrameSampler &sampler, const std::vector<MeasurementSetting> &settings, size_t shots,
                    const RunOptions &opt);
/// Same with a shot count per setting.
ShotBatch run_shots(const FrameSampler &sampler, const std::vector<MeasurementSetting> &settings,
                    const std::vector<size_t> &shots, const RunOptions &opt);

/// Per-qubit flip estimates with binomial standard errors, indexed by data
/// position.
struct ReadoutCalibration {
    std::vector<double> eps;
    std::vector<double> eps_stderr;

    /// prod_{j in support} (1 - 2 eps_j); all positions when support is empty.
    double baseline(const std::vector<int> &support = {}) const;
};

/// Prepares |0> and |1> on every data qubit `shots` times each and counts
/// readout flips.
ReadoutCalibration calibrate_readout(const NoiseModel &nm, const std::vector<int> &data_qubits, size_t shots,
                                     uint64_t seed);

/// Exact calibration from the model's rates.
ReadoutCalibration exact_calibration(const NoiseModel &nm, const std::vector<int> &data_qubits);

/// (1 - prod (1 - 2 eps_j)) / 2.
double parity_flip_probability(const std::vector<double> &eps);

}  // namespace ghzforge

#endif  // GHZFORGE_NOISE_H_
