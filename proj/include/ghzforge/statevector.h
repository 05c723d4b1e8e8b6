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

#ifndef GHZFORGE_STATEVECTOR_H_
#define GHZFORGE_STATEVECTOR_H_

#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ghzforge/circuit.h"
#include "ghzforge/noise.h"

namespace ghzforge {

class OracleError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Dense state on a list of hardware qubits. Bit k of a basis index is
/// qubits[k].
class StateVector {
   public:
    static constexpr int kMaxQubits = 14;

    explicit StateVector(std::vector<int> qubits);

    const Eigen::VectorXcd &amplitudes() const { return psi_; }
    int num_qubits() const { return static_cast<int>(qubits_.size()); }
    int position(int q) const;

    void apply_h(int q);
    void apply_cnot(int control, int target);
    void apply_pauli(int q, Pauli p);
    /// Rz(-phi) followed by H, mapping cos(phi) X + sin(phi) Y onto Z.
    void apply_basis_rotation(int q, double phi);
    /// MeasureZ is a no-op; outcomes are read with prob_one.
    void apply_gate(const Gate &g);

    double prob_one(int q) const;
    /// <Z_{q1} Z_{q2} ...>.
    double z_product(const std::vector<int> &qs) const;

   private:
    std::vector<int> qubits_;
    std::map<int, int> pos_;
    Eigen::VectorXcd psi_;
};

struct InjectedFault {
    int qubit = 0;
    /// The fault acts right after this layer.
    int layer = 0;
    Pauli pauli = Pauli::kI;
};

/// Runs the circuit on |0...0> over Circuit::all_qubits(), injecting faults.
StateVector simulate_circuit(const Circuit &c, const std::vector<InjectedFault> &faults = {});

/// Probability that each ancilla (ascending) reads 1.
std::vector<double> ancilla_one_probabilities(const StateVector &s, const Circuit &c);

/// (|0...0> + |1...1>) / sqrt(2).
Eigen::VectorXcd ghz_state(int n);

/// Dense operator from a Pauli string; character k acts on bit k.
Eigen::MatrixXcd pauli_operator(const std::string &pauli);

/// M_phi = prod_j (cos(phi) X_j + sin(phi) Y_j).
Eigen::MatrixXcd parity_operator(int n, double phi);

/// Re Tr(rho O).
double expectation(const Eigen::MatrixXcd &rho, const Eigen::MatrixXcd &op);

/// Data-qubit reduced density matrix (partial trace over ancillas).
Eigen::MatrixXcd data_density(const StateVector &s, const Circuit &c);

/// Haar-like random pure state density matrix mixed with a random diagonal.
Eigen::MatrixXcd random_density(int n, uint64_t seed);

}  // namespace ghzforge

#endif  // GHZFORGE_STATEVECTOR_H_
