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

#include "ghzforge/statevector.h"

#include <array>
#include <cmath>

#include "ghzforge/rng.h"

namespace ghzforge {

using cd = std::complex<double>;

StateVector::StateVector(std::vector<int> qubits) : qubits_(std::move(qubits)) {
    if (static_cast<int>(qubits_.size()) > kMaxQubits) {
        throw OracleError("statevector oracle is limited to " + std::to_string(kMaxQubits) + " qubits, got " +
                          std::to_string(qubits_.size()));
    }
    for (size_t k = 0; k < qubits_.size(); ++k) {
        if (!pos_.emplace(qubits_[k], static_cast<int>(k)).second) {
            throw OracleError("duplicate qubit " + std::to_string(qubits_[k]));
        }
    }
    psi_ = Eigen::VectorXcd::Zero(Eigen::Index{1} << qubits_.size());
    psi_(0) = 1.0;
}

int StateVector::position(int q) const {
    auto it = pos_.find(q);
    if (it == pos_.end()) {
        throw OracleError("qubit " + std::to_string(q) + " is not simulated");
    }
    return it->second;
}

void StateVector::apply_h(int q) {
    const Eigen::Index bit = Eigen::Index{1} << position(q);
    const double r = M_SQRT1_2;
    for (Eigen::Index i = 0; i < psi_.size(); ++i) {
        if (i & bit) continue;
        const cd a = psi_(i), b = psi_(i | bit);
        psi_(i) = r * (a + b);
        psi_(i | bit) = r * (a - b);
    }
}

void StateVector::apply_cnot(int control, int target) {
    const Eigen::Index cb = Eigen::Index{1} << position(control);
    const Eigen::Index tb = Eigen::Index{1} << position(target);
    for (Eigen::Index i = 0; i < psi_.size(); ++i) {
        if ((i & cb) && !(i & tb)) std::swap(psi_(i), psi_(i | tb));
    }
}

void StateVector::apply_pauli(int q, Pauli p) {
    const Eigen::Index bit = Eigen::Index{1} << position(q);
    const auto code = static_cast<unsigned>(p);
    if (code & 2u) {  // Z first, then X: X Z = -i Y, phase dropped.
        for (Eigen::Index i = 0; i < psi_.size(); ++i) {
            if (i & bit) psi_(i) = -psi_(i);
        }
    }
    if (code & 1u) {
        for (Eigen::Index i = 0; i < psi_.size(); ++i) {
            if (!(i & bit)) std::swap(psi_(i), psi_(i | bit));
        }
    }
}

void StateVector::apply_basis_rotation(int q, double phi) {
    const Eigen::Index bit = Eigen::Index{1} << position(q);
    const cd lo = std::polar(1.0, phi / 2), hi = std::polar(1.0, -phi / 2);
    for (Eigen::Index i = 0; i < psi_.size(); ++i) {
        psi_(i) *= (i & bit) ? hi : lo;
    }
    apply_h(q);
}

void StateVector::apply_gate(const Gate &g) {
    switch (g.kind) {
        case GateKind::kPrepPlus:
            apply_h(g.q0);
            return;
        case GateKind::kCnot:
        case GateKind::kUncomputeCnot:
        case GateKind::kRecomputeCnot:
        case GateKind::kCheckCnot:
            apply_cnot(g.q0, g.q1);
            return;
        case GateKind::kBasisRotation:
            apply_basis_rotation(g.q0, g.phi);
            return;
        case GateKind::kMeasureZ:
            return;
    }
}

double StateVector::prob_one(int q) const {
    const Eigen::Index bit = Eigen::Index{1} << position(q);
    double p = 0;
    for (Eigen::Index i = 0; i < psi_.size(); ++i) {
        if (i & bit) p += std::norm(psi_(i));
    }
    return p;
}

double StateVector::z_product(const std::vector<int> &qs) const {
    Eigen::Index mask = 0;
    for (int q : qs) mask |= Eigen::Index{1} << position(q);
    double e = 0;
    for (Eigen::Index i = 0; i < psi_.size(); ++i) {
        const bool odd = __builtin_popcountll(static_cast<unsigned long long>(i & mask)) & 1;
        e += odd ? -std::norm(psi_(i)) : std::norm(psi_(i));
    }
    return e;
}

StateVector simulate_circuit(const Circuit &c, const std::vector<InjectedFault> &faults) {
    StateVector s(c.all_qubits());
    for (int t = 0; t < c.depth(); ++t) {
        for (const auto &g : c.layers[t]) s.apply_gate(g);
        for (const auto &f : faults) {
            if (f.layer == t) s.apply_pauli(f.qubit, f.pauli);
        }
    }
    return s;
}

std::vector<double> ancilla_one_probabilities(const StateVector &s, const Circuit &c) {
    std::vector<double> out;
    for (int a : c.ancillas) out.push_back(s.prob_one(a));
    return out;
}

Eigen::VectorXcd ghz_state(int n) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(Eigen::Index{1} << n);
    v(0) = M_SQRT1_2;
    v(v.size() - 1) = M_SQRT1_2;
    return v;
}

namespace {

using Mat2 = std::array<std::array<cd, 2>, 2>;

Eigen::MatrixXcd tensor_product(const std::vector<Mat2> &factors) {
    const Eigen::Index dim = Eigen::Index{1} << factors.size();
    Eigen::MatrixXcd m(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            cd v = 1.0;
            for (size_t k = 0; k < factors.size() && v != cd(0.0); ++k) {
                v *= factors[k][(i >> k) & 1][(j >> k) & 1];
            }
            m(i, j) = v;
        }
    }
    return m;
}

}  // namespace

Eigen::MatrixXcd pauli_operator(const std::string &pauli) {
    const cd I(0, 1);
    std::vector<Mat2> f;
    for (char ch : pauli) {
        switch (ch) {
            case 'I': f.push_back({{{1, 0}, {0, 1}}}); break;
            case 'X': f.push_back({{{0, 1}, {1, 0}}}); break;
            case 'Y': f.push_back({{{0, -I}, {I, 0}}}); break;
            case 'Z': f.push_back({{{1, 0}, {0, -1}}}); break;
            default: throw OracleError(std::string("bad Pauli character ") + ch);
        }
    }
    return tensor_product(f);
}

Eigen::MatrixXcd parity_operator(int n, double phi) {
    const Mat2 m{{{0, std::polar(1.0, -phi)}, {std::polar(1.0, phi), 0}}};
    return tensor_product(std::vector<Mat2>(static_cast<size_t>(n), m));
}

double expectation(const Eigen::MatrixXcd &rho, const Eigen::MatrixXcd &op) { return (rho * op).trace().real(); }

Eigen::MatrixXcd data_density(const StateVector &s, const Circuit &c) {
    const int n = static_cast<int>(c.activation.size());
    const Eigen::Index dim = Eigen::Index{1} << n;
    const Eigen::Index rest = s.amplitudes().size() >> n;
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
    const auto &psi = s.amplitudes();
    for (Eigen::Index a = 0; a < rest; ++a) {
        const auto block = psi.segment(a * dim, dim);
        rho += block * block.adjoint();
    }
    return rho;
}

Eigen::MatrixXcd random_density(int n, uint64_t seed) {
    Rng rng(seed);
    const Eigen::Index dim = Eigen::Index{1} << n;
    auto gaussian = [&]() {
        const double u1 = 1.0 - rng.uniform(), u2 = rng.uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    };
    auto random_pure = [&]() {
        Eigen::VectorXcd v(dim);
        for (Eigen::Index i = 0; i < dim; ++i) v(i) = cd(gaussian(), gaussian());
        // Extra weight on the GHZ corners.
        v(0) += 2.0 * rng.uniform();
        v(dim - 1) += cd(2.0 * rng.uniform(), rng.uniform());
        return Eigen::VectorXcd(v.normalized());
    };
    const Eigen::VectorXcd a = random_pure();
    const Eigen::VectorXcd b = random_pure();
    Eigen::VectorXd diag(dim);
    for (Eigen::Index i = 0; i < dim; ++i) diag(i) = rng.uniform();
    diag /= diag.sum();
    const double wa = rng.uniform(), wb = rng.uniform(), wd = rng.uniform();
    const double tot = wa + wb + wd;
    Eigen::MatrixXcd rho = (wa / tot) * a * a.adjoint() + (wb / tot) * b * b.adjoint();
    rho.diagonal() += (wd / tot) * diag.cast<cd>();
    return rho;
}

}  // namespace ghzforge
