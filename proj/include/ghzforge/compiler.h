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

#ifndef GHZFORGE_COMPILER_H_
#define GHZFORGE_COMPILER_H_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ghzforge/circuit.h"
#include "ghzforge/hwgraph.h"

namespace ghzforge {

class CompileError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// BFS spanning tree of the GHZ support.
struct GhzTree {
    int root = -1;
    /// Visitation order, root first.
    std::vector<int> order;
    std::map<int, int> parent;
    /// Children of each support qubit in visitation order.
    std::map<int, std::vector<int>> children;

    size_t size() const { return order.size(); }
    bool contains(int q) const { return q == root || parent.count(q) > 0; }
};

/// Error-eligible locations whose X or Y fault flips a check. Sorted.
struct DetectingRegion {
    std::vector<SpacetimeLocation> locations;

    size_t size() const { return locations.size(); }
    bool empty() const { return locations.empty(); }
    bool contains(SpacetimeLocation loc) const;
};

/// Z_i Z_j parity measured through `ancilla`.
struct ParityCheck {
    int ancilla = -1;
    int i = -1;
    int j = -1;
    DetectingRegion region;
};

struct CoverageReport {
    size_t covered = 0;
    size_t total = 0;
    double fraction = 0;
    std::vector<size_t> per_check;
    /// Only filled when location weights were supplied.
    std::optional<double> weighted_fraction;
};

struct CompileConfig {
    int n_data = 0;
    int trials = 1;
    double block_probability = 0.06;
    uint64_t seed = 0;
    bool uncompute = true;
    /// A qubit is uncomputed when it idles for more than this many layers
    /// after its last entangling CNOT.
    int uncompute_idle_threshold = 10;
    /// Cap on uncomputed qubits; candidates are taken root first.
    int uncompute_max_qubits = 1;
    DropoutPolicy dropout;
    /// Score trials by error-probability-weighted coverage instead of the
    /// plain location ratio.
    bool weighted_coverage = false;
    int threads = 1;
};

struct TrialRecord {
    int trial = 0;
    uint64_t seed = 0;
    int n_checks = 0;
    double coverage = 0;
    int cnot_depth = 0;
    /// False when the trial could not reach n_data qubits.
    bool accepted = false;
};

struct CompileResult {
    /// Final circuit: prep, optional uncompute/recompute, checks, ancilla
    /// measurement.
    Circuit circuit;
    GhzTree tree;
    /// Sorted by ancilla id, which is also the syndrome bit order. Regions are
    /// exact back-propagated sets on the final circuit.
    std::vector<ParityCheck> checks;
    CoverageReport coverage;
    /// Coverage of the winning trial before uncomputation.
    CoverageReport search_coverage;
    std::vector<int> uncomputed;
    std::vector<TrialRecord> trial_log;
    int best_trial = -1;
    int root = -1;
};

/// BFS from `root` over unblocked qubits. Neighbors are expanded in order of
/// (gate error, id). Stops once n_data qubits are visited.
GhzTree grow_tree(const HardwareGraph &g, int root, int n_data, const std::set<int> &blocked = {});

/// ASAP CNOT layering of the tree: each qubit fans out to its children in
/// order of decreasing subtree height (visitation order on ties).
Circuit build_prep_circuit(const GhzTree &tree);

/// Union of the two leaf-to-LCA paths of data qubits i and j.
DetectingRegion detecting_region(const SpacetimeTree &tree, int i, int j);

/// Exact back-propagation of Z_i Z_j from the end of preparation. Returns the
/// error-eligible locations carrying Z; every other location carries I. An X
/// or Y fault at a location flips the check iff the location is listed.
DetectingRegion back_propagator(const Circuit &c, int i, int j);

/// One check per ancilla and per data qubit. Candidate pairs are ranked by
/// region size; parent-child pairs are rejected.
std::vector<ParityCheck> allocate_checks(const HardwareGraph &g, const GhzTree &tree, const Circuit &prep);

/// Per-location weights for weighted coverage: X/Y-type fault probability
/// from the graph's calibration.
std::map<SpacetimeLocation, double> location_weights(const HardwareGraph &g, const Circuit &c);

CoverageReport coverage(const Circuit &c, const std::vector<ParityCheck> &checks,
                        const std::map<SpacetimeLocation, double> *weights = nullptr);

/// Appends the two check-CNOT layers and the ancilla measurement layer.
Circuit append_checks(const Circuit &prep, const std::vector<ParityCheck> &checks);

/// (ancilla, i, j) triples recovered from a circuit's check CNOTs, ordered by
/// ancilla id. Regions are recomputed with back_propagator.
std::vector<ParityCheck> checks_from_circuit(const Circuit &c);

/// Temporarily uncomputes long-idle internal qubits (root first). The
/// uncompute CNOT from an excited tree neighbour is scheduled ASAP after the
/// qubit's last CNOT and the recompute ALAP, inside the prep section when the
/// partner has a free slot, otherwise in one extra trailing prep layer.
/// At most `max_qubits` qubits are uncomputed (negative: no cap). `prep`
/// must not contain checks.
Circuit insert_uncompute(const Circuit &prep, const GhzTree &tree, int threshold, int max_qubits = -1);

CompileResult randomized_compile(const HardwareGraph &g, const CompileConfig &cfg);

std::string trial_log_csv(const std::vector<TrialRecord> &log);

}  // namespace ghzforge

#endif  // GHZFORGE_COMPILER_H_
