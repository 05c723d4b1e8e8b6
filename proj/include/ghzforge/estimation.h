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

#ifndef GHZFORGE_ESTIMATION_H_
#define GHZFORGE_ESTIMATION_H_

#include <complex>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ghzforge/noise.h"
#include "ghzforge/rng.h"
#include "ghzforge/stabilizer.h"

namespace ghzforge {

class EstimationError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

enum class Method { kDfe, kParityOscillation, kPopulationPlusCoherence };
enum class Mitigation { kNone, kTrex, kTensoredInverse };

std::string to_string(Method m);
std::string to_string(Mitigation m);
Mitigation parse_mitigation(const std::string &s);

struct Estimate {
    double value = 0;
    double std_error = 0;
};

/// Mean of one observable and the variance of that mean.
struct MeanVar {
    double mean = 0;
    double variance = 0;
    size_t shots = 0;
};

/// Uniform over all 2^n elements of the GHZ stabilizer group.
StabilizerLabel sample_stabilizer_uniform(int n, Rng &rng);

/// sign * mean of raw ±1 outcomes, with variance (1 - mean^2) / shots.
MeanVar stabilizer_expectation(const std::vector<int> &outcomes, int sign);
MeanVar stabilizer_expectation(long long sum, size_t count, int sign);

/// (1/m) (mean(var) + unbiased sample variance of s).
double variance_of_mean(const std::vector<double> &s, const std::vector<double> &var);

struct FidelityComponents {
    double P = 0;
    double P_err = 0;
    double chi = 0;
    double chi_err = 0;
    double C = 0;
    double theta = 0;
    std::complex<double> I_N;
    std::complex<double> I_minusN;
    /// (P + C) / 2, the fidelity to the best phase-rotated GHZ state.
    double rotated_fidelity = 0;
};

struct FidelityEstimate {
    double value = 0;
    double std_error = 0;
    Method method = Method::kDfe;
    Mitigation mitigation = Mitigation::kNone;
    std::optional<FidelityComponents> components;

    /// Genuine multipartite entanglement: point estimate above 1/2.
    bool verdict_gme() const { return value > 0.5; }
    /// (value - 1/2) / std_error; infinite when std_error is 0.
    double margin_sigma() const;
};

/// Plain average over sampled labels (with replacement).
FidelityEstimate dfe_fidelity(const std::vector<MeanVar> &per_label, Mitigation mitigation = Mitigation::kNone);

/// Divides mean by prod_{j in support} (1 - 2 eps_j) and the variance by its
/// square. Throws EstimationError when the baseline is below `floor`.
MeanVar trex_mitigate(const MeanVar &raw, const ReadoutCalibration &cal, const std::vector<int> &support,
                      double floor = 1e-3);

/// Quasi-probabilities over the observed bitstrings.
struct QuasiDistribution {
    /// Renormalized to unit sum; entries may be negative.
    std::map<std::string, double> values;
    /// Total negative mass before clipping.
    double clipped_mass = 0;

    /// Negative entries set to 0 and the rest rescaled to unit sum.
    std::map<std::string, double> clipped() const;
};

/// Per-qubit inverse confusion matrices applied on the observed subspace.
/// Pairs further apart than `hamming_cutoff` are ignored (-1: no cutoff).
QuasiDistribution tensored_inverse_mitigate(const std::map<std::string, size_t> &counts, const ReadoutCalibration &cal,
                                            int hamming_cutoff = -1);

/// Mass of the all-zeros and all-ones strings. With `cal`, after tensored
/// inversion normalized over the whole string space, which keeps the
/// estimate linear in the counts; the standard error then follows the delta
/// method.
Estimate population(const std::map<std::string, size_t> &counts, const ReadoutCalibration *cal = nullptr,
                    int hamming_cutoff = -1);

/// (1/N) sum_k (-1)^k M(k pi / N), k = 1..N, from values[k - 1].
Estimate chi_uniform_phase(const std::vector<MeanVar> &values);

/// Parity signal on phi_j = j pi / (N + 1), j = 0..2N+1.
struct ParityOscillationSignal {
    int n = 0;
    std::vector<double> angles;
    std::vector<double> values;
    std::vector<double> std_errors;

    static std::vector<double> grid(int n);
};

struct FourierResult {
    std::complex<double> I_N;
    std::complex<double> I_minusN;
    double chi = 0;
    double chi_err = 0;
    double C = 0;
    double theta = 0;
};

FourierResult fourier_components(const ParityOscillationSignal &signal);

/// (P + chi) / 2 with errors in quadrature.
FidelityEstimate combine_fidelity(const Estimate &P, const Estimate &chi, const std::optional<FourierResult> &fourier,
                                  Mitigation mitigation);

}  // namespace ghzforge

#endif  // GHZFORGE_ESTIMATION_H_
