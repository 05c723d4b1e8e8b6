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

#include "ghzforge/noise.h"

#include <algorithm>
#include <cmath>

#include "ghzforge/parallel.h"

namespace ghzforge {

namespace {

double lookup(const std::map<int, double> &m, int q, double fallback) {
    auto it = m.find(q);
    return it == m.end() ? fallback : it->second;
}

void check_probability(double p, const std::string &what) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw NoiseError(what + " must lie in [0, 1], got " + std::to_string(p));
    }
}

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

}  // namespace

double NoiseModel::cnot_rate(int a, int b) const {
    auto it = edge_cnot_error.find({std::min(a, b), std::max(a, b)});
    return it == edge_cnot_error.end() ? cnot_error : it->second;
}

double NoiseModel::dephasing(int q) const {
    const double p = lookup(qubit_dephasing, q, idle_dephasing);
    return dd_enabled ? p * dd_residual : p;
}

double NoiseModel::relaxation(int q) const { return lookup(qubit_relaxation, q, idle_relaxation); }

double NoiseModel::readout(int q) const { return lookup(qubit_readout, q, readout_flip); }

void NoiseModel::validate() const {
    check_probability(cnot_error, "cnot_error");
    check_probability(idle_dephasing, "idle_dephasing");
    check_probability(idle_relaxation, "idle_relaxation");
    check_probability(readout_flip, "readout_flip");
    check_probability(dd_residual, "dd_residual");
    check_probability(ground_relaxation_residual, "ground_relaxation_residual");
    for (const auto &[e, p] : edge_cnot_error) check_probability(p, "edge cnot_error");
    for (const auto &[q, p] : qubit_dephasing) check_probability(p, "qubit idle_dephasing");
    for (const auto &[q, p] : qubit_relaxation) check_probability(p, "qubit idle_relaxation");
    for (const auto &[q, p] : qubit_readout) check_probability(p, "qubit readout_flip");
}

NoiseModel noise_from_graph(const HardwareGraph &g, bool dd_enabled) {
    NoiseModel nm;
    nm.dd_enabled = dd_enabled;
    for (const auto &e : g.edges()) {
        nm.edge_cnot_error[{e.a, e.b}] = e.gate_error;
    }
    for (const auto &q : g.qubits()) {
        nm.qubit_dephasing[q.id] = q.idle_dephasing;
        nm.qubit_relaxation[q.id] = q.idle_relaxation;
        nm.qubit_readout[q.id] = q.readout_error;
    }
    return nm;
}

NoiseModel scale_noise(const NoiseModel &nm, double factor) {
    NoiseModel out = nm;
    out.cnot_error = clamp01(nm.cnot_error * factor);
    out.idle_dephasing = clamp01(nm.idle_dephasing * factor);
    out.idle_relaxation = clamp01(nm.idle_relaxation * factor);
    out.readout_flip = clamp01(nm.readout_flip * factor);
    out.ground_relaxation_residual = clamp01(nm.ground_relaxation_residual * factor);
    for (auto &[e, p] : out.edge_cnot_error) p = clamp01(p * factor);
    for (auto &[q, p] : out.qubit_dephasing) p = clamp01(p * factor);
    for (auto &[q, p] : out.qubit_relaxation) p = clamp01(p * factor);
    for (auto &[q, p] : out.qubit_readout) p = clamp01(p * factor);
    return out;
}

namespace {

bool is_measure_layer(const std::vector<Gate> &layer) {
    return std::any_of(layer.begin(), layer.end(), [](const Gate &g) { return g.kind == GateKind::kMeasureZ; });
}

void conjugate_layer(const std::vector<Gate> &layer, const std::map<int, int> &pos, const std::vector<PauliFrame> &next,
                     std::vector<PauliFrame> &out) {
    // out[2k + b] = effect of (b ? Z : X) on k before `layer`, given `next`
    // holding effects after it.
    out = next;
    for (const auto &g : layer) {
        if (g.kind == GateKind::kBasisRotation) {
            throw NoiseError("frame sampling needs a circuit without basis rotations");
        }
        if (!g.is_cnot()) {
            continue;
        }
        const size_t c = static_cast<size_t>(pos.at(g.q0));
        const size_t t = static_cast<size_t>(pos.at(g.q1));
        // X_c -> X_c X_t, Z_t -> Z_c Z_t.
        out[2 * c] = next[2 * c];
        out[2 * c] ^= next[2 * t];
        out[2 * t + 1] = next[2 * t + 1];
        out[2 * t + 1] ^= next[2 * c + 1];
    }
}

}  // namespace

PauliFrame propagate_fault(const Circuit &c, int q, int layer, Pauli p) {
    const auto qubits = c.all_qubits();
    std::map<int, int> pos;
    for (size_t k = 0; k < qubits.size(); ++k) pos[qubits[k]] = static_cast<int>(k);
    if (!pos.count(q)) {
        throw NoiseError("qubit " + std::to_string(q) + " is not in the circuit");
    }
    if (layer < 0 || layer >= c.depth()) {
        throw NoiseError("layer out of range");
    }
    PauliFrame f(qubits.size());
    const size_t k = static_cast<size_t>(pos[q]);
    const auto code = static_cast<uint8_t>(p);
    f.x[k] = code & 1;
    f.z[k] = (code >> 1) & 1;
    for (int t = layer + 1; t < c.depth(); ++t) {
        for (const auto &g : c.layers[t]) {
            if (g.kind == GateKind::kBasisRotation) {
                throw NoiseError("frame propagation needs a circuit without basis rotations");
            }
            if (!g.is_cnot()) {
                continue;
            }
            const size_t a = static_cast<size_t>(pos[g.q0]);
            const size_t b = static_cast<size_t>(pos[g.q1]);
            if (f.x[a]) f.x.flip(b);
            if (f.z[b]) f.z.flip(a);
        }
    }
    return f;
}

void SettingTally::add(const ShotRecord &r) {
    ++shots;
    if (r.accepted) ++accepted;
    if (setting.kind == SettingKind::kZBasis) {
        std::string key(r.bits.size(), '0');
        for (size_t k = 0; k < r.bits.size(); ++k) {
            if (r.bits[k]) key[k] = '1';
        }
        ++counts_all[key];
        if (r.accepted) ++counts_accepted[key];
    } else {
        sum_all += r.value;
        if (r.accepted) sum_accepted += r.value;
    }
}

FrameSampler::FrameSampler(const Circuit &c, const NoiseModel &nm) : circuit_(c), noise_(nm) {
    noise_.validate();
    qubits_ = c.all_qubits();
    n_data_ = static_cast<int>(c.activation.size());
    const size_t nq = qubits_.size();
    std::map<int, int> pos;
    for (size_t k = 0; k < nq; ++k) pos[qubits_[k]] = static_cast<int>(k);

    data_mask_.resize(nq);
    for (int k = 0; k < n_data_; ++k) data_mask_.set(k);
    for (int k = 0; k < n_data_; ++k) {
        data_readout_.push_back(nm.readout(qubits_[k]));
    }
    for (size_t k = n_data_; k < nq; ++k) {
        ancilla_readout_.push_back(nm.readout(qubits_[k]));
    }
    parity_flip_all_ = parity_flip_probability(data_readout_);

    // First layer at which each ancilla participates.
    std::map<int, int> ancilla_start;
    for (int t = 0; t < c.depth(); ++t) {
        for (const auto &g : c.layers[t]) {
            if (g.kind == GateKind::kCheckCnot && !ancilla_start.count(g.q1)) {
                ancilla_start[g.q1] = t;
            }
        }
    }

    const int depth = c.depth();
    effect_.assign(static_cast<size_t>(depth) * nq * 2, PauliFrame(nq));
    std::vector<PauliFrame> after(2 * nq, PauliFrame(nq));
    for (size_t k = 0; k < nq; ++k) {
        after[2 * k].x.set(k);
        after[2 * k + 1].z.set(k);
    }
    for (int t = depth - 1; t >= 0; --t) {
        std::copy(after.begin(), after.end(), effect_.begin() + static_cast<long>(t * nq * 2));
        if (t > 0) {
            std::vector<PauliFrame> before;
            conjugate_layer(c.layers[t], pos, after, before);
            after = std::move(before);
        }
    }

    for (int t = 0; t < depth; ++t) {
        const auto &layer = c.layers[t];
        if (is_measure_layer(layer)) {
            continue;
        }
        std::vector<char> in_gate(nq, 0);
        for (const auto &g : layer) {
            if (g.kind == GateKind::kBasisRotation) {
                throw NoiseError("frame sampling needs a circuit without basis rotations");
            }
            if (!g.is_cnot()) {
                continue;
            }
            const int a = pos.at(g.q0);
            const int b = pos.at(g.q1);
            in_gate[a] = in_gate[b] = 1;
            const double p = nm.cnot_rate(g.q0, g.q1);
            if (p > 0) {
                sites_.push_back({a, b, p, 0, 0, t});
            }
        }
        for (size_t k = 0; k < nq; ++k) {
            if (in_gate[k]) {
                continue;
            }
            const int q = qubits_[k];
            double px = 0, pz = 0;
            if (static_cast<int>(k) < n_data_) {
                if (t < c.activation.at(q)) {
                    continue;
                }
                if (c.in_ground_span(q, t)) {
                    px = nm.ground_relaxation_residual;
                } else {
                    px = nm.relaxation(q);
                    pz = nm.dephasing(q);
                }
            } else {
                auto it = ancilla_start.find(q);
                if (it == ancilla_start.end() || t < it->second) {
                    continue;
                }
                px = nm.relaxation(q);
                pz = nm.dephasing(q);
            }
            if (px > 0 || pz > 0) {
                sites_.push_back({static_cast<int>(k), -1, 0, px, pz, t});
            }
        }
    }
}

PauliFrame FrameSampler::sample_frame(Rng &rng) const {
    const size_t nq = qubits_.size();
    PauliFrame f(nq);
    auto apply = [&](int layer, int k, unsigned code) {
        const size_t base = (static_cast<size_t>(layer) * nq + static_cast<size_t>(k)) * 2;
        if (code & 1u) f ^= effect_[base];
        if (code & 2u) f ^= effect_[base + 1];
    };
    for (const auto &s : sites_) {
        if (s.k1 >= 0) {
            if (rng.uniform() < s.p_gate) {
                const auto idx = static_cast<unsigned>(1 + rng.below(15));
                apply(s.layer, s.k0, idx & 3u);
                apply(s.layer, s.k1, idx >> 2);
            }
        } else {
            unsigned code = 0;
            if (s.p_x > 0 && rng.uniform() < s.p_x) code |= 1u;
            if (s.p_z > 0 && rng.uniform() < s.p_z) code |= 2u;
            if (code) apply(s.layer, s.k0, code);
        }
    }
    return f;
}

boost::dynamic_bitset<> FrameSampler::check_syndromes(const PauliFrame &frame, Rng &rng) const {
    boost::dynamic_bitset<> s(ancilla_readout_.size());
    for (size_t a = 0; a < ancilla_readout_.size(); ++a) {
        bool bit = frame.x[n_data_ + a];
        if (ancilla_readout_[a] > 0 && rng.uniform() < ancilla_readout_[a]) bit = !bit;
        s[a] = bit;
    }
    return s;
}

double FrameSampler::frame_expectation(const PauliFrame &frame, const MeasurementSetting &setting) const {
    const auto xw = static_cast<int>((frame.x & data_mask_).count());
    const auto zw = static_cast<int>((frame.z & data_mask_).count());
    switch (setting.kind) {
        case SettingKind::kParity: {
            const double v = std::cos(static_cast<double>(n_data_ - 2 * xw) * setting.phi);
            return zw % 2 ? -v : v;
        }
        case SettingKind::kStabilizer: {
            int overlap = 0;
            for (int k : setting.label.support) overlap += frame.x[k];
            if (!setting.label.x_part) {
                return overlap % 2 ? -1.0 : 1.0;
            }
            const int s = setting.label.sign() * ((zw + overlap) % 2 ? -1 : 1);
            return s;
        }
        case SettingKind::kZBasis:
            break;
    }
    throw NoiseError("Z-basis setting has no scalar expectation");
}

void FrameSampler::sample_data_outcome(const PauliFrame &frame, const MeasurementSetting &setting, Rng &rng,
                                       ShotRecord &out, bool twirl) const {
    auto sample_bits = [&]() {
        boost::dynamic_bitset<> bits(static_cast<size_t>(n_data_));
        const bool branch = rng() & 1u;
        for (int k = 0; k < n_data_; ++k) {
            bool b = branch != static_cast<bool>(frame.x[k]);
            const bool tw = twirl && (rng() & 1u);
            b = b != tw;
            if (data_readout_[k] > 0 && rng.uniform() < data_readout_[k]) b = !b;
            bits[k] = b != tw;
        }
        return bits;
    };
    switch (setting.kind) {
        case SettingKind::kZBasis:
            out.bits = sample_bits();
            out.value = 0;
            return;
        case SettingKind::kStabilizer:
            if (!setting.label.x_part) {
                const auto bits = sample_bits();
                int parity = 0;
                for (int k : setting.label.support) parity ^= bits[k];
                out.bits.clear();
                out.value = parity ? -1 : 1;
                return;
            }
            [[fallthrough]];
        case SettingKind::kParity: {
            const double v = frame_expectation(frame, setting);
            int value = rng.uniform() < 0.5 * (1.0 + v) ? 1 : -1;
            const bool tw = twirl && (rng() & 1u);
            if (tw) value = -value;
            if (parity_flip_all_ > 0 && rng.uniform() < parity_flip_all_) value = -value;
            out.bits.clear();
            out.value = tw ? -value : value;
            return;
        }
    }
    throw NoiseError("unknown measurement setting");
}

ShotBatch run_shots(const Circuit &c, const NoiseModel &nm, const std::vector<MeasurementSetting> &settings,
                    size_t shots, const RunOptions &opt) {
    return run_shots(FrameSampler(c, nm), settings, shots, opt);
}

ShotBatch run_shots(const FrameSampler &sampler, const std::vector<MeasurementSetting> &settings, size_t shots,
                    const RunOptions &opt) {
    return run_shots(sampler, settings, std::vector<size_t>(settings.size(), shots), opt);
}

ShotBatch run_shots(const FrameSampler &sampler, const std::vector<MeasurementSetting> &settings,
                    const std::vector<size_t> &shot_counts, const RunOptions &opt) {
    if (shot_counts.size() != settings.size()) {
        throw NoiseError("one shot count per setting is required");
    }
    ShotBatch batch;
    batch.tallies.resize(settings.size());
    std::vector<size_t> offset(settings.size() + 1, 0);
    for (size_t i = 0; i < settings.size(); ++i) offset[i + 1] = offset[i] + shot_counts[i];
    if (opt.keep_records) {
        batch.records.resize(offset.back());
    }
    const int threads = std::max(1, opt.threads);
    const size_t chunks = threads > 1 ? static_cast<size_t>(threads) * 4 : 1;
    for (size_t i = 0; i < settings.size(); ++i) {
        const size_t shots = shot_counts[i];
        const uint64_t base = derive_seed(opt.seed, Stream::kShot, i);
        std::vector<SettingTally> partial(chunks);
        for (auto &p : partial) p.setting = settings[i];
        parallel_for(chunks, threads, [&](size_t chunk) {
            const size_t begin = shots * chunk / chunks;
            const size_t end = shots * (chunk + 1) / chunks;
            ShotRecord rec;
            for (size_t s = begin; s < end; ++s) {
                Rng rng(derive_seed(base, Stream::kShot, s));
                const PauliFrame frame = sampler.sample_frame(rng);
                rec.setting = static_cast<int>(i);
                rec.syndromes = sampler.check_syndromes(frame, rng);
                rec.accepted = rec.syndromes.none();
                sampler.sample_data_outcome(frame, settings[i], rng, rec, opt.twirl_readout);
                partial[chunk].add(rec);
                if (opt.keep_records) {
                    batch.records[offset[i] + s] = rec;
                }
            }
        });
        SettingTally &t = batch.tallies[i];
        t.setting = settings[i];
        for (const auto &p : partial) {
            t.shots += p.shots;
            t.accepted += p.accepted;
            t.sum_all += p.sum_all;
            t.sum_accepted += p.sum_accepted;
            for (const auto &[k, v] : p.counts_all) t.counts_all[k] += v;
            for (const auto &[k, v] : p.counts_accepted) t.counts_accepted[k] += v;
        }
        batch.shots += t.shots;
        batch.accepted += t.accepted;
    }
    return batch;
}

double ReadoutCalibration::baseline(const std::vector<int> &support) const {
    double b = 1.0;
    if (support.empty()) {
        for (double e : eps) b *= 1.0 - 2.0 * e;
    } else {
        for (int k : support) b *= 1.0 - 2.0 * eps.at(k);
    }
    return b;
}

ReadoutCalibration calibrate_readout(const NoiseModel &nm, const std::vector<int> &data_qubits, size_t shots,
                                     uint64_t seed) {
    if (shots == 0) {
        throw NoiseError("calibration needs at least one shot");
    }
    ReadoutCalibration cal;
    for (size_t k = 0; k < data_qubits.size(); ++k) {
        Rng rng(derive_seed(seed, Stream::kCalibration, k));
        const double p = nm.readout(data_qubits[k]);
        size_t flips = 0;
        // |0> and |1> preparations flip with the same probability.
        for (size_t s = 0; s < 2 * shots; ++s) {
            flips += rng.uniform() < p;
        }
        const double n = 2.0 * static_cast<double>(shots);
        const double e = std::min(static_cast<double>(flips) / n, 0.5 - 1e-9);
        cal.eps.push_back(e);
        cal.eps_stderr.push_back(std::sqrt(e * (1.0 - e) / n));
    }
    return cal;
}

ReadoutCalibration exact_calibration(const NoiseModel &nm, const std::vector<int> &data_qubits) {
    ReadoutCalibration cal;
    for (int q : data_qubits) {
        cal.eps.push_back(nm.readout(q));
        cal.eps_stderr.push_back(0.0);
    }
    return cal;
}

double parity_flip_probability(const std::vector<double> &eps) {
    double b = 1.0;
    for (double e : eps) b *= 1.0 - 2.0 * e;
    return 0.5 * (1.0 - b);
}

}  // namespace ghzforge
