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

#ifndef GHZFORGE_CIRCUIT_H_
#define GHZFORGE_CIRCUIT_H_

#include <compare>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ghzforge {

enum class GateKind {
    kPrepPlus,
    kCnot,
    kUncomputeCnot,
    kRecomputeCnot,
    kCheckCnot,
    kMeasureZ,
    kBasisRotation,
};

/// One gate. For CNOT kinds q0 is the control and q1 the target; for
/// kCheckCnot q0 is the data qubit and q1 the ancilla. Single-qubit kinds
/// leave q1 = -1.
struct Gate {
    GateKind kind = GateKind::kPrepPlus;
    int q0 = 0;
    int q1 = -1;
    double phi = 0;

    static Gate prep_plus(int q) { return {GateKind::kPrepPlus, q, -1, 0}; }
    static Gate cnot(int control, int target) { return {GateKind::kCnot, control, target, 0}; }
    static Gate uncompute(int control, int target) { return {GateKind::kUncomputeCnot, control, target, 0}; }
    static Gate recompute(int control, int target) { return {GateKind::kRecomputeCnot, control, target, 0}; }
    static Gate check(int data, int ancilla) { return {GateKind::kCheckCnot, data, ancilla, 0}; }
    static Gate measure_z(int q) { return {GateKind::kMeasureZ, q, -1, 0}; }
    static Gate basis_rotation(int q, double phi) { return {GateKind::kBasisRotation, q, -1, phi}; }

    bool is_cnot() const {
        return kind == GateKind::kCnot || kind == GateKind::kUncomputeCnot || kind == GateKind::kRecomputeCnot ||
               kind == GateKind::kCheckCnot;
    }
    bool acts_on(int q) const { return q0 == q || q1 == q; }

    bool operator==(const Gate &) const = default;
};

/// Half-open layer interval [begin, end).
struct Span {
    int begin = 0;
    int end = 0;

    bool contains(int t) const { return begin <= t && t < end; }
    bool operator==(const Span &) const = default;
};

/// A qubit's wire right after the gates of `layer` have acted.
struct SpacetimeLocation {
    int qubit = 0;
    int layer = 0;

    auto operator<=>(const SpacetimeLocation &) const = default;
};

class CircuitError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Layered GHZ preparation circuit on hardware qubit ids.
///
/// The preparation section is followed by the parity-check section (check
/// CNOTs, then ancilla measurement). `activation` maps every data qubit to the
/// first layer in which it is excited; the root maps to 0. `ground_spans`
/// lists, per temporarily uncomputed qubit, the layers in which it is back in
/// |0>.
struct Circuit {
    int n_data = 0;
    std::vector<int> ancillas;
    std::vector<std::vector<Gate>> layers;
    std::map<int, int> activation;
    std::map<int, std::vector<Span>> ground_spans;

    int depth() const { return static_cast<int>(layers.size()); }
    /// Data qubits in ascending id order. Bit k of every data bitstring refers
    /// to data_qubits()[k].
    std::vector<int> data_qubits() const;
    /// Data qubits followed by ancillas, both ascending.
    std::vector<int> all_qubits() const;
    int root() const;
    /// Number of leading layers before the first check, measurement or basis
    /// rotation.
    int prep_depth() const;
    bool in_ground_span(int q, int t) const;
    /// (q, t) is a data location in the prep section with t >= l_q and
    /// outside every ground span.
    bool is_error_eligible(int q, int t) const;
    /// W_err in (qubit, layer) order.
    std::vector<SpacetimeLocation> error_eligible_locations() const;

    bool operator==(const Circuit &) const = default;
};

/// Structural checks: one gate per qubit per layer, distinct CNOT operands,
/// a single PrepPlus in layer 0, activation consistent with the gates.
void validate_circuit(const Circuit &c);

struct DepthStats {
    int total_depth = 0;
    /// Layers holding at least one CNOT of any kind.
    int cnot_depth = 0;
    /// Same, restricted to the preparation section.
    int prep_cnot_depth = 0;
};

DepthStats depth_stats(const Circuit &c);

enum class CircuitFormat { kCanonicalJson, kQasmText };

std::string emit_circuit(const Circuit &c, CircuitFormat format);
Circuit parse_circuit_json(std::string_view text);

/// Copy of `c` with a final layer rotating every data qubit into the
/// M_phi measurement basis.
Circuit with_parity_rotation(const Circuit &c, double phi);

enum class TreeEdgeKind { kWire, kBranch };

/// Rooted tree over the error-eligible data locations of the prep section.
///
/// Every non-root node owns exactly one edge, the one to its parent, so a
/// location and its edge are interchangeable. Wire edges join (q, t-1) to
/// (q, t). A CNOT at layer t that excites target r from control c adds the
/// branch edge (c, t-1) -> (r, t); the control continues with the wire edge
/// (c, t-1) -> (c, t). Both outputs of the CNOT therefore hang from the
/// control's input location.
class SpacetimeTree {
   public:
    const std::vector<SpacetimeLocation> &nodes() const { return nodes_; }
    size_t size() const { return nodes_.size(); }
    size_t num_edges() const { return nodes_.empty() ? 0 : nodes_.size() - 1; }
    int root_node() const { return 0; }
    int parent(int node) const { return parent_[node]; }
    TreeEdgeKind edge_kind(int node) const { return kind_[node]; }
    int node_depth(int node) const { return depth_[node]; }
    std::optional<int> find(SpacetimeLocation loc) const;
    /// Final prep location of data qubit q.
    int leaf(int q) const;
    int lca(int a, int b) const;
    /// True when a reused control (or recompute partner) broke the pure tree
    /// structure, i.e. the circuit contains temporary uncomputation.
    bool has_uncompute() const { return has_uncompute_; }

   private:
    friend SpacetimeTree build_spacetime_tree(const Circuit &c);

    std::vector<SpacetimeLocation> nodes_;
    std::vector<int> parent_;
    std::vector<TreeEdgeKind> kind_;
    std::vector<int> depth_;
    std::map<int, int> data_pos_;
    int prep_depth_ = 0;
    std::vector<int> grid_;
    std::map<int, int> leaf_;
    bool has_uncompute_ = false;
};

/// Throws CircuitError when a CNOT's control is not yet excited, an
/// activation targets an excited qubit, or a data qubit is never reached.
SpacetimeTree build_spacetime_tree(const Circuit &c);

}  // namespace ghzforge

#endif  // GHZFORGE_CIRCUIT_H_
