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

#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "ghzforge/compiler.h"
#include "ghzforge/lattices.h"
#include "ghzforge/statevector.h"

namespace ghzforge {
namespace {

/// Two branches 0-1-2 and 0-3-4 closed by ancilla 5.
HardwareGraph loop_graph() {
    return HardwareGraph({{0}, {1}, {2}, {3}, {4}, {5}},
                         {{0, 1, 0}, {1, 2, 0}, {0, 3, 0}, {3, 4, 0}, {2, 5, 0}, {4, 5, 0}});
}

/// Small compiled circuits holding at least one check, at most 9 qubits.
std::vector<Circuit> small_circuits() {
    std::vector<Circuit> out;
    auto add = [&](const HardwareGraph &g, int n, bool uncompute, uint64_t seed) {
        CompileConfig cfg;
        cfg.n_data = n;
        cfg.trials = 4;
        cfg.seed = seed;
        cfg.uncompute = uncompute;
        cfg.uncompute_idle_threshold = 1;
        const Circuit c = randomized_compile(g, cfg).circuit;
        if (!c.ancillas.empty() && c.all_qubits().size() <= 9) out.push_back(c);
    };
    add(loop_graph(), 5, false, 0);
    add(loop_graph(), 5, true, 0);
    add(grid_graph(2, 4), 6, false, 1);
    add(grid_graph(2, 4), 6, true, 3);
    add(grid_graph(3, 3), 7, true, 4);
    return out;
}

void apply_frame(StateVector &s, const std::vector<int> &qubits, const PauliFrame &f) {
    for (size_t k = 0; k < qubits.size(); ++k) {
        if (f.x[k]) s.apply_pauli(qubits[k], Pauli::kX);
        if (f.z[k]) s.apply_pauli(qubits[k], Pauli::kZ);
    }
}

TEST(NoiseModel, ValidationAndScaling) {
    NoiseModel nm;
    nm.cnot_error = 1.5;
    EXPECT_THROW(nm.validate(), NoiseError);
    nm.cnot_error = 0.5;
    nm.qubit_readout[3] = -0.1;
    EXPECT_THROW(nm.validate(), NoiseError);
    nm.qubit_readout[3] = 0.1;
    EXPECT_NO_THROW(nm.validate());
    const NoiseModel s = scale_noise(nm, 4.0);
    EXPECT_DOUBLE_EQ(s.cnot_error, 1.0);
    EXPECT_DOUBLE_EQ(s.readout(3), 0.4);
    EXPECT_DOUBLE_EQ(scale_noise(nm, 0.0).readout(3), 0.0);
}

TEST(NoiseModel, DynamicalDecouplingScalesDephasingOnly) {
    NoiseModel nm;
    nm.idle_dephasing = 0.02;
    nm.idle_relaxation = 0.01;
    nm.dd_residual = 0.1;
    EXPECT_DOUBLE_EQ(nm.dephasing(0), 0.02);
    nm.dd_enabled = true;
    EXPECT_DOUBLE_EQ(nm.dephasing(0), 0.002);
    EXPECT_DOUBLE_EQ(nm.relaxation(0), 0.01);
}

TEST(NoiseModel, FromGraphCopiesPerElementRates) {
    const HardwareGraph g({{0, 0.01, 0.02, 0.03}, {1, 0.04, 0.05, 0.06}}, {{0, 1, 0.07}});
    const NoiseModel nm = noise_from_graph(g, false);
    EXPECT_DOUBLE_EQ(nm.cnot_rate(1, 0), 0.07);
    EXPECT_DOUBLE_EQ(nm.readout(1), 0.04);
    EXPECT_DOUBLE_EQ(nm.dephasing(0), 0.02);
    EXPECT_DOUBLE_EQ(nm.relaxation(1), 0.06);
}

TEST(FrameSampler, ZeroNoiseGivesIdentityFrame) {
    for (const auto &c : small_circuits()) {
        const FrameSampler fs(c, NoiseModel{});
        EXPECT_EQ(fs.num_sites(), 0u);
        Rng rng(1);
        EXPECT_TRUE(fs.sample_frame(rng).is_identity());
        const ShotBatch b = run_shots(c, NoiseModel{}, {MeasurementSetting::z_basis()}, 200, {});
        EXPECT_EQ(b.retention(), 1.0);
        for (const auto &[key, n] : b.tallies[0].counts_all) {
            EXPECT_TRUE(key == std::string(key.size(), '0') || key == std::string(key.size(), '1')) << key;
        }
    }
}

TEST(FrameSampler, PropagationMatchesStateVectorConjugation) {
    size_t checked = 0;
    for (const auto &c : small_circuits()) {
        const auto qubits = c.all_qubits();
        for (int t = 0; t < c.depth(); ++t) {
            for (int q : qubits) {
                for (Pauli p : {Pauli::kX, Pauli::kZ, Pauli::kY}) {
                    const PauliFrame f = propagate_fault(c, q, t, p);
                    StateVector expected = simulate_circuit(c);
                    apply_frame(expected, qubits, f);
                    const auto faulty = simulate_circuit(c, {{q, t, p}}).amplitudes();
                    EXPECT_NEAR(std::abs(expected.amplitudes().dot(faulty)), 1.0, 1e-9);
                    ++checked;
                }
            }
        }
    }
    EXPECT_GT(checked, 300u);
}

TEST(FrameSampler, SyndromeAndDataOutcomesMatchOracle) {
    for (const auto &c : small_circuits()) {
        const auto qubits = c.all_qubits();
        const int n = c.n_data;
        const FrameSampler fs(c, NoiseModel{});
        const Eigen::MatrixXcd par0 = parity_operator(n, 0.0);
        const Eigen::MatrixXcd par1 = parity_operator(n, 0.3);
        // Raw outcome of the unsigned Pauli string; the stabilizer is sign() times it.
        const StabilizerLabel lbl{true, {0, n - 1}};
        std::string pauli = lbl.str(n).substr(1);
        const Eigen::MatrixXcd stab = pauli_operator(pauli);
        for (int t = 0; t < c.prep_depth(); ++t) {
            for (int q : qubits) {
                for (Pauli p : {Pauli::kX, Pauli::kZ, Pauli::kY}) {
                    const PauliFrame f = propagate_fault(c, q, t, p);
                    const StateVector s = simulate_circuit(c, {{q, t, p}});
                    const auto probs = ancilla_one_probabilities(s, c);
                    Rng rng(0);
                    const auto syn = fs.check_syndromes(f, rng);
                    for (size_t a = 0; a < probs.size(); ++a) {
                        EXPECT_NEAR(probs[a], syn[a] ? 1.0 : 0.0, 1e-9);
                    }
                    const Eigen::MatrixXcd rho = data_density(s, c);
                    EXPECT_NEAR(fs.frame_expectation(f, MeasurementSetting::parity(0.0)), expectation(rho, par0), 1e-9);
                    EXPECT_NEAR(fs.frame_expectation(f, MeasurementSetting::parity(0.3)), expectation(rho, par1), 1e-9);
                    EXPECT_NEAR(fs.frame_expectation(f, MeasurementSetting::stabilizer(lbl)),
                                expectation(rho, stab), 1e-9);
                }
            }
        }
    }
}

TEST(FrameSampler, EffectTablesMatchPropagation) {
    // Certain relaxation on one qubit flips it at every idle site, so the
    // sampled frame is the XOR of the individually propagated faults.
    for (const auto &c : small_circuits()) {
        const auto qubits = c.all_qubits();
        for (int k = 0; k < c.n_data; ++k) {
            const int q = qubits[k];
            for (bool dephase : {false, true}) {
                NoiseModel nm;
                (dephase ? nm.qubit_dephasing : nm.qubit_relaxation)[q] = 1.0;
                const FrameSampler fs(c, nm);
                Rng rng(3);
                const PauliFrame got = fs.sample_frame(rng);
                PauliFrame want(qubits.size());
                for (int t = c.activation.at(q); t < c.depth(); ++t) {
                    bool idle = true;
                    bool measure = false;
                    for (const auto &g : c.layers[t]) {
                        if (g.is_cnot() && g.acts_on(q)) idle = false;
                        if (g.kind == GateKind::kMeasureZ) measure = true;
                    }
                    if (!idle || measure || c.in_ground_span(q, t)) continue;
                    want ^= propagate_fault(c, q, t, dephase ? Pauli::kZ : Pauli::kX);
                }
                EXPECT_EQ(got, want) << "qubit " << q;
            }
        }
    }
}

TEST(FrameSampler, DephasingNeverTriggersChecks) {
    NoiseModel nm;
    nm.idle_dephasing = 0.2;
    for (const auto &c : small_circuits()) {
        const ShotBatch b = run_shots(c, nm, {MeasurementSetting::parity(0.0)}, 500, {});
        EXPECT_EQ(b.retention(), 1.0);
    }
}

TEST(FrameSampler, ZFaultsOnlyTouchZPart) {
    for (const auto &c : small_circuits()) {
        for (int q : c.all_qubits()) {
            for (int t = 0; t < c.depth(); ++t) {
                EXPECT_TRUE(propagate_fault(c, q, t, Pauli::kZ).x.none());
            }
        }
    }
}

TEST(FrameSampler, ParityOutcomeFollowsAngleMap) {
    const Circuit c = small_circuits().front();
    const int n = c.n_data;
    const FrameSampler fs(c, NoiseModel{});
    PauliFrame f(c.all_qubits().size());
    const double phi = 0.41;
    EXPECT_NEAR(fs.frame_expectation(f, MeasurementSetting::parity(phi)), std::cos(n * phi), 1e-12);
    f.z.set(0);
    EXPECT_NEAR(fs.frame_expectation(f, MeasurementSetting::parity(phi)), -std::cos(n * phi), 1e-12);
    f.x.set(1);
    f.x.set(2);
    EXPECT_NEAR(fs.frame_expectation(f, MeasurementSetting::parity(phi)), -std::cos((n - 4) * phi), 1e-12);
    // X on every data qubit maps cos(N phi) onto itself.
    PauliFrame all(c.all_qubits().size());
    for (int k = 0; k < n; ++k) all.x.set(k);
    EXPECT_NEAR(fs.frame_expectation(all, MeasurementSetting::parity(phi)), std::cos(n * phi), 1e-12);
}

TEST(FrameSampler, SampledParityMeanMatchesCosine) {
    const Circuit c = small_circuits().front();
    const double phi = 0.2;
    const ShotBatch b = run_shots(c, NoiseModel{}, {MeasurementSetting::parity(phi)}, 40000, {.seed = 8});
    const double mean = static_cast<double>(b.tallies[0].sum_all) / 40000.0;
    const double v = std::cos(c.n_data * phi);
    EXPECT_NEAR(mean, v, 5.0 * std::sqrt((1 - v * v) / 40000.0));
}

TEST(Readout, ParityFlipMatchesEnumeration) {
    const std::vector<double> eps{0.01, 0.2, 0.05, 0.3, 0.12};
    double odd = 0;
    for (unsigned m = 0; m < (1u << eps.size()); ++m) {
        double p = 1;
        for (size_t k = 0; k < eps.size(); ++k) p *= (m >> k) & 1u ? eps[k] : 1 - eps[k];
        if (__builtin_popcount(m) % 2) odd += p;
    }
    EXPECT_NEAR(parity_flip_probability(eps), odd, 1e-15);
    EXPECT_EQ(parity_flip_probability({}), 0.0);
}

TEST(Readout, CalibrationRecoversFlipRates) {
    NoiseModel nm;
    nm.qubit_readout = {{0, 0.02}, {1, 0.1}, {2, 0.0}};
    const ReadoutCalibration cal = calibrate_readout(nm, {0, 1, 2}, 20000, 4);
    for (int k = 0; k < 3; ++k) {
        const double e = nm.readout(k);
        EXPECT_NEAR(cal.eps[k], e, 5 * std::sqrt(e * (1 - e) / 40000) + 1e-12);
    }
    EXPECT_EQ(cal.eps[2], 0.0);
    const ReadoutCalibration ex = exact_calibration(nm, {0, 1});
    EXPECT_DOUBLE_EQ(ex.baseline(), 0.96 * 0.8);
    EXPECT_DOUBLE_EQ(ex.baseline({1}), 0.8);
    EXPECT_THROW(calibrate_readout(nm, {0}, 0, 1), NoiseError);
}

TEST(Readout, ZBasisFlipRatePerBit) {
    const Circuit c = small_circuits().front();
    NoiseModel nm;
    nm.readout_flip = 0.1;
    const size_t shots = 20000;
    const ShotBatch b = run_shots(c, nm, {MeasurementSetting::z_basis()}, shots, {.seed = 2});
    // Bits 0 and 1 disagree iff exactly one of them flipped.
    size_t disagree = 0;
    for (const auto &[key, n] : b.tallies[0].counts_all) disagree += key[0] != key[1] ? n : 0;
    const double want = 2 * 0.1 * 0.9;
    EXPECT_NEAR(static_cast<double>(disagree) / shots, want, 5 * std::sqrt(want * (1 - want) / shots));
}

TEST(Readout, TwirlLeavesNoiselessOutcomesIntact) {
    const Circuit c = small_circuits().front();
    RunOptions opt;
    opt.twirl_readout = true;
    const ShotBatch b = run_shots(c, NoiseModel{}, {MeasurementSetting::z_basis(), MeasurementSetting::parity(0.0)}, 300, opt);
    for (const auto &[key, n] : b.tallies[0].counts_all) {
        EXPECT_TRUE(key == std::string(key.size(), '0') || key == std::string(key.size(), '1'));
    }
    EXPECT_EQ(b.tallies[1].sum_all, 300);
}

TEST(Sampling, FirstOrderSyndromeRate) {
    // Relaxation on a single data qubit: the check fires when an odd number
    // of the m detected sites fault.
    const Circuit c = small_circuits().front();
    const auto qubits = c.all_qubits();
    const int q = qubits[1];
    const double p = 0.01;
    NoiseModel nm;
    nm.qubit_relaxation[q] = p;
    int m = 0;
    for (int t = c.activation.at(q); t < c.prep_depth(); ++t) {
        bool idle = true;
        for (const auto &g : c.layers[t]) idle = idle && !(g.is_cnot() && g.acts_on(q));
        if (!idle || c.in_ground_span(q, t)) continue;
        const PauliFrame f = propagate_fault(c, q, t, Pauli::kX);
        bool fires = false;
        for (size_t a = c.n_data; a < qubits.size(); ++a) fires = fires || f.x[a];
        m += fires;
    }
    // Faults on the wire during the check layers are counted separately.
    for (int t = c.prep_depth(); t < c.depth(); ++t) {
        bool idle = true, measure = false;
        for (const auto &g : c.layers[t]) {
            idle = idle && !(g.is_cnot() && g.acts_on(q));
            measure = measure || g.kind == GateKind::kMeasureZ;
        }
        if (!idle || measure) continue;
        const PauliFrame f = propagate_fault(c, q, t, Pauli::kX);
        bool fires = false;
        for (size_t a = c.n_data; a < qubits.size(); ++a) fires = fires || f.x[a];
        m += fires;
    }
    ASSERT_GT(m, 0);
    ASSERT_EQ(c.ancillas.size(), 1u);
    const double reject = 0.5 * (1 - std::pow(1 - 2 * p, m));
    const size_t shots = 200000;
    const ShotBatch b = run_shots(c, nm, {MeasurementSetting::z_basis()}, shots, {.seed = 6});
    EXPECT_NEAR(1 - b.retention(), reject, 5 * std::sqrt(reject * (1 - reject) / shots));
}

TEST(Sampling, PostSelectionKeepsExactlyCleanSyndromes) {
    const Circuit c = small_circuits()[1];
    NoiseModel nm;
    nm.cnot_error = 0.05;
    nm.idle_relaxation = 0.02;
    nm.readout_flip = 0.02;
    RunOptions opt;
    opt.keep_records = true;
    opt.seed = 11;
    const ShotBatch b = run_shots(c, nm, {MeasurementSetting::parity(0.0), MeasurementSetting::z_basis()}, 2000, opt);
    size_t accepted = 0;
    for (const auto &r : b.records) {
        EXPECT_EQ(r.accepted, r.syndromes.none());
        EXPECT_EQ(r.syndromes.size(), c.ancillas.size());
        accepted += r.accepted;
    }
    EXPECT_EQ(accepted, b.accepted);
    EXPECT_LT(b.retention(), 1.0);
    EXPECT_GT(b.retention(), 0.5);
    // Post-selection removes detected X faults, so the accepted parity is
    // no worse than the raw one.
    const auto &t = b.tallies[0];
    EXPECT_GE(static_cast<double>(t.sum_accepted) / t.accepted, static_cast<double>(t.sum_all) / t.shots - 0.02);
}

TEST(Sampling, IndependentOfThreadCount) {
    const Circuit c = small_circuits()[2];
    NoiseModel nm;
    nm.cnot_error = 0.03;
    nm.idle_dephasing = 0.01;
    nm.idle_relaxation = 0.01;
    nm.readout_flip = 0.02;
    const std::vector<MeasurementSetting> settings{MeasurementSetting::z_basis(), MeasurementSetting::parity(0.1),
                                                   MeasurementSetting::stabilizer({true, {0, 1}})};
    RunOptions one{.seed = 9, .threads = 1, .keep_records = true};
    RunOptions four = one;
    four.threads = 4;
    const ShotBatch a = run_shots(c, nm, settings, 777, one);
    const ShotBatch b = run_shots(c, nm, settings, 777, four);
    ASSERT_EQ(a.records.size(), b.records.size());
    for (size_t i = 0; i < a.records.size(); ++i) {
        EXPECT_EQ(a.records[i].syndromes, b.records[i].syndromes);
        EXPECT_EQ(a.records[i].bits, b.records[i].bits);
        EXPECT_EQ(a.records[i].value, b.records[i].value);
    }
    for (size_t s = 0; s < settings.size(); ++s) {
        EXPECT_EQ(a.tallies[s].counts_all, b.tallies[s].counts_all);
        EXPECT_EQ(a.tallies[s].sum_all, b.tallies[s].sum_all);
        EXPECT_EQ(a.tallies[s].accepted, b.tallies[s].accepted);
    }
}

TEST(Sampling, RejectsMismatchedShotCounts) {
    const FrameSampler fs(small_circuits().front(), NoiseModel{});
    EXPECT_THROW(run_shots(fs, {MeasurementSetting::z_basis()}, std::vector<size_t>{1, 2}, {}), NoiseError);
}

}  // namespace
}  // namespace ghzforge
