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

#include "ghzforge/estimation.h"

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include <spdlog/spdlog.h>

namespace ghzforge {

std::string to_string(Method m) {
    switch (m) {
        case Method::kDfe: return "dfe";
        case Method::kParityOscillation: return "parity_oscillation";
        case Method::kPopulationPlusCoherence: return "population_plus_coherence";
    }
    return "unknown";
}

std::string to_string(Mitigation m) {
    switch (m) {
        case Mitigation::kNone: return "none";
        case Mitigation::kTrex: return "trex";
        case Mitigation::kTensoredInverse: return "tensored_inverse";
    }
    return "unknown";
}

Mitigation parse_mitigation(const std::string &s) {
    if (s == "none") return Mitigation::kNone;
    if (s == "trex") return Mitigation::kTrex;
    if (s == "tensored_inverse") return Mitigation::kTensoredInverse;
    throw EstimationError("unknown mitigation '" + s + "'");
}

StabilizerLabel sample_stabilizer_uniform(int n, Rng &rng) {
    if (n < 2) {
        throw EstimationError("stabilizer sampling needs n >= 2");
    }
    StabilizerLabel l;
    l.x_part = rng() & 1u;
    int parity = 0;
    for (int k = 0; k + 1 < n; ++k) {
        if (rng() & 1u) {
            l.support.push_back(k);
            parity ^= 1;
        }
    }
    if (parity) l.support.push_back(n - 1);
    return l;
}

MeanVar stabilizer_expectation(long long sum, size_t count, int sign) {
    if (count == 0) {
        throw EstimationError("no accepted shots for stabilizer estimate");
    }
    MeanVar mv;
    mv.shots = count;
    mv.mean = sign * static_cast<double>(sum) / static_cast<double>(count);
    mv.variance = std::max(0.0, 1.0 - mv.mean * mv.mean) / static_cast<double>(count);
    return mv;
}

MeanVar stabilizer_expectation(const std::vector<int> &outcomes, int sign) {
    long long sum = 0;
    for (int v : outcomes) {
        if (v != 1 && v != -1) {
            throw EstimationError("outcomes must be +1 or -1");
        }
        sum += v;
    }
    return stabilizer_expectation(sum, outcomes.size(), sign);
}

double variance_of_mean(const std::vector<double> &s, const std::vector<double> &var) {
    const size_t m = s.size();
    if (m < 2) {
        throw EstimationError("variance of the mean needs at least two samples");
    }
    if (var.size() != m) {
        throw EstimationError("mean and variance lists differ in length");
    }
    const double mean_var = std::accumulate(var.begin(), var.end(), 0.0) / static_cast<double>(m);
    const double mean_s = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(m);
    double ss = 0;
    for (double v : s) ss += (v - mean_s) * (v - mean_s);
    const double var_s = ss / static_cast<double>(m - 1);
    return (mean_var + var_s) / static_cast<double>(m);
}

double FidelityEstimate::margin_sigma() const {
    if (std_error > 0) {
        return (value - 0.5) / std_error;
    }
    if (value == 0.5) return 0.0;
    return value > 0.5 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

FidelityEstimate dfe_fidelity(const std::vector<MeanVar> &per_label, Mitigation mitigation) {
    std::vector<double> s, var;
    for (const auto &mv : per_label) {
        s.push_back(mv.mean);
        var.push_back(mv.variance);
    }
    const double v = variance_of_mean(s, var);
    FidelityEstimate f;
    f.value = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
    f.std_error = std::sqrt(v);
    f.method = Method::kDfe;
    f.mitigation = mitigation;
    return f;
}

MeanVar trex_mitigate(const MeanVar &raw, const ReadoutCalibration &cal, const std::vector<int> &support,
                      double floor) {
    const double b = cal.baseline(support);
    if (!(b >= floor)) {
        throw EstimationError("readout baseline " + std::to_string(b) + " is below the floor " + std::to_string(floor));
    }
    MeanVar out = raw;
    out.mean = raw.mean / b;
    out.variance = raw.variance / (b * b);
    return out;
}

std::map<std::string, double> QuasiDistribution::clipped() const {
    std::map<std::string, double> out;
    double total = 0;
    for (const auto &[k, v] : values) {
        if (v > 0) {
            out[k] = v;
            total += v;
        }
    }
    if (total > 0) {
        for (auto &[k, v] : out) v /= total;
    }
    return out;
}

namespace {

using Words = std::vector<uint64_t>;

Words pack(const std::string &bits) {
    Words w((bits.size() + 63) / 64, 0);
    for (size_t k = 0; k < bits.size(); ++k) {
        if (bits[k] == '1') {
            w[k / 64] |= uint64_t{1} << (k % 64);
        } else if (bits[k] != '0') {
            throw EstimationError("bitstring holds a character other than 0 or 1");
        }
    }
    return w;
}

/// Tensored inverse confusion matrix element between two packed strings.
class InverseConfusion {
   public:
    InverseConfusion(const ReadoutCalibration &cal, size_t n, int cutoff) : cutoff_(cutoff) {
        if (cal.eps.size() != n) {
            throw EstimationError("calibration covers " + std::to_string(cal.eps.size()) + " qubits, bitstrings have " +
                                  std::to_string(n));
        }
        diag_ = 1.0;
        for (double e : cal.eps) {
            if (!(e >= 0.0 && e < 0.5)) {
                throw EstimationError("singular readout calibration (eps must lie in [0, 0.5))");
            }
            diag_ *= (1.0 - e) / (1.0 - 2.0 * e);
            ratio_.push_back(-e / (1.0 - e));
        }
    }

    /// Returns false when the pair is beyond the cutoff.
    bool element(const Words &a, const Words &b, double &out) const {
        int dist = 0;
        for (size_t w = 0; w < a.size(); ++w) dist += __builtin_popcountll(a[w] ^ b[w]);
        if (cutoff_ >= 0 && dist > cutoff_) return false;
        double v = diag_;
        for (size_t w = 0; w < a.size() && v != 0.0; ++w) {
            uint64_t diff = a[w] ^ b[w];
            while (diff) {
                const int bit = __builtin_ctzll(diff);
                v *= ratio_[w * 64 + static_cast<size_t>(bit)];
                diff &= diff - 1;
            }
        }
        out = v;
        return true;
    }

    /// Sum of any column over every string within the cutoff (1 without one).
    double column_mass() const {
        const size_t top = cutoff_ < 0 ? ratio_.size() : std::min(ratio_.size(), static_cast<size_t>(cutoff_));
        std::vector<double> e(top + 1, 0.0);
        e[0] = 1.0;
        for (double r : ratio_) {
            for (size_t k = top; k > 0; --k) e[k] += r * e[k - 1];
        }
        return diag_ * std::accumulate(e.begin(), e.end(), 0.0);
    }

   private:
    int cutoff_;
    double diag_ = 1.0;
    std::vector<double> ratio_;
};

struct Inversion {
    std::vector<std::string> keys;
    std::vector<Words> packed;
    std::vector<double> p;
    std::vector<double> q;
    double total = 0;
};

Inversion invert(const std::map<std::string, size_t> &counts, const ReadoutCalibration &cal, int cutoff) {
    Inversion inv;
    size_t n_shots = 0;
    size_t width = 0;
    for (const auto &[k, v] : counts) {
        if (inv.keys.empty()) width = k.size();
        if (k.size() != width) {
            throw EstimationError("bitstrings differ in length");
        }
        inv.keys.push_back(k);
        inv.packed.push_back(pack(k));
        inv.p.push_back(static_cast<double>(v));
        n_shots += v;
    }
    if (n_shots == 0) {
        throw EstimationError("empty shot set");
    }
    for (double &v : inv.p) v /= static_cast<double>(n_shots);
    inv.total = static_cast<double>(n_shots);
    const InverseConfusion m(cal, width, cutoff);
    const size_t k = inv.keys.size();
    inv.q.assign(k, 0.0);
    for (size_t y = 0; y < k; ++y) {
        for (size_t x = y; x < k; ++x) {
            double e;
            if (!m.element(inv.packed[y], inv.packed[x], e)) continue;
            inv.q[y] += e * inv.p[x];
            if (x != y) {
                inv.q[x] += e * inv.p[y];
            }
        }
    }
    return inv;
}

}  // namespace

QuasiDistribution tensored_inverse_mitigate(const std::map<std::string, size_t> &counts, const ReadoutCalibration &cal,
                                            int hamming_cutoff) {
    const Inversion inv = invert(counts, cal, hamming_cutoff);
    const double norm = std::accumulate(inv.q.begin(), inv.q.end(), 0.0);
    if (!(std::abs(norm) > 0)) {
        throw EstimationError("corrected distribution has zero mass");
    }
    QuasiDistribution out;
    for (size_t y = 0; y < inv.keys.size(); ++y) {
        const double v = inv.q[y] / norm;
        out.values[inv.keys[y]] = v;
        if (v < 0) out.clipped_mass -= v;
    }
    if (out.clipped_mass > 0) {
        spdlog::debug("tensored inversion clipped {} negative quasi-probability mass", out.clipped_mass);
    }
    return out;
}

Estimate population(const std::map<std::string, size_t> &counts, const ReadoutCalibration *cal, int hamming_cutoff) {
    size_t n_shots = 0;
    for (const auto &[k, v] : counts) n_shots += v;
    if (n_shots == 0) {
        throw EstimationError("empty shot set");
    }
    auto is_ghz = [](const std::string &s) {
        return s.find('1') == std::string::npos || s.find('0') == std::string::npos;
    };
    const double n = static_cast<double>(n_shots);
    if (!cal) {
        size_t good = 0;
        for (const auto &[k, v] : counts) {
            if (is_ghz(k)) good += v;
        }
        const double p = static_cast<double>(good) / n;
        return {p, std::sqrt(p * (1.0 - p) / n)};
    }
    const Inversion inv = invert(counts, *cal, hamming_cutoff);
    const size_t k = inv.keys.size();
    const InverseConfusion m(*cal, inv.keys.front().size(), hamming_cutoff);
    // a_x = sum_{y in GHZ, observed} M_yx.
    std::vector<double> a(k, 0.0);
    double num = 0;
    for (size_t y = 0; y < k; ++y) {
        if (!is_ghz(inv.keys[y])) continue;
        num += inv.q[y];
        for (size_t x = 0; x < k; ++x) {
            double e;
            if (m.element(inv.packed[y], inv.packed[x], e)) a[x] += e;
        }
    }
    // Normalized by the mass over the whole string space, not the observed
    // subset, so the estimate stays linear in the counts.
    const double den = m.column_mass();
    if (!(std::abs(den) > 0)) {
        throw EstimationError("corrected distribution has zero mass");
    }
    const double f = num / den;
    double var = 0;
    for (size_t x = 0; x < k; ++x) {
        const double g = a[x] / den - f;
        var += g * g * inv.p[x];
    }
    return {f, std::sqrt(var / n)};
}

Estimate chi_uniform_phase(const std::vector<MeanVar> &values) {
    const size_t n = values.size();
    if (n == 0) {
        throw EstimationError("no parity settings for the uniform-phase coherence");
    }
    double chi = 0, var = 0;
    for (size_t k = 1; k <= n; ++k) {
        chi += (k % 2 ? -1.0 : 1.0) * values[k - 1].mean;
        var += values[k - 1].variance;
    }
    const double nn = static_cast<double>(n);
    return {chi / nn, std::sqrt(var) / nn};
}

std::vector<double> ParityOscillationSignal::grid(int n) {
    std::vector<double> g;
    for (int j = 0; j <= 2 * n + 1; ++j) {
        g.push_back(j * M_PI / (n + 1));
    }
    return g;
}

FourierResult fourier_components(const ParityOscillationSignal &signal) {
    const int n = signal.n;
    const size_t points = static_cast<size_t>(2 * n + 2);
    if (n < 1 || signal.values.size() != points || signal.angles.size() != points) {
        throw EstimationError("parity signal needs 2N + 2 = " + std::to_string(points) + " points, got " +
                              std::to_string(signal.values.size()));
    }
    const std::vector<double> &err = signal.std_errors;
    FourierResult r;
    double var = 0;
    const double norm = 1.0 / (2.0 * (n + 1));
    for (size_t j = 0; j < points; ++j) {
        // q j reduced mod 2(N+1).
        const long long period = 2LL * (n + 1);
        const long long r_pos = (static_cast<long long>(n) * static_cast<long long>(j)) % period;
        const double ang = static_cast<double>(r_pos) * M_PI / (n + 1);
        const std::complex<double> e = std::polar(1.0, ang);
        r.I_N += norm * e * signal.values[j];
        r.I_minusN += norm * std::conj(e) * signal.values[j];
        if (!err.empty()) {
            const double w = std::cos(ang) / (n + 1);
            var += w * w * err[j] * err[j];
        }
    }
    r.chi = (r.I_N + r.I_minusN).real();
    r.chi_err = std::sqrt(var);
    r.C = std::abs(r.I_N) + std::abs(r.I_minusN);
    r.theta = -std::atan2(r.I_N.imag(), r.I_N.real());
    return r;
}

FidelityEstimate combine_fidelity(const Estimate &P, const Estimate &chi, const std::optional<FourierResult> &fourier,
                                  Mitigation mitigation) {
    FidelityEstimate f;
    f.value = 0.5 * (P.value + chi.value);
    f.std_error = 0.5 * std::hypot(P.std_error, chi.std_error);
    f.method = fourier ? Method::kParityOscillation : Method::kPopulationPlusCoherence;
    f.mitigation = mitigation;
    FidelityComponents c;
    c.P = P.value;
    c.P_err = P.std_error;
    c.chi = chi.value;
    c.chi_err = chi.std_error;
    if (fourier) {
        c.C = fourier->C;
        c.theta = fourier->theta;
        c.I_N = fourier->I_N;
        c.I_minusN = fourier->I_minusN;
    } else {
        c.C = std::abs(chi.value);
    }
    c.rotated_fidelity = 0.5 * (P.value + c.C);
    f.components = c;
    return f;
}

}  // namespace ghzforge
