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

#ifndef GHZFORGE_HWGRAPH_H_
#define GHZFORGE_HWGRAPH_H_

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ghzforge {

struct QubitSpec {
    int id = 0;
    double readout_error = 0;
    /// Per-layer probability of an idle Z error.
    double idle_dephasing = 0;
    /// Per-layer probability of an idle X-type error.
    double idle_relaxation = 0;

    bool operator==(const QubitSpec &) const = default;
};

struct EdgeSpec {
    int a = 0;
    int b = 0;
    double gate_error = 0;

    bool operator==(const EdgeSpec &) const = default;
};

struct DropoutPolicy {
    double max_gate_error = 1.0;
    double max_readout_error = 1.0;
};

class GraphError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Qubit connectivity with per-element error rates.
///
/// Qubit ids are hardware labels and survive dropouts, so after
/// `apply_dropouts` the id range may contain holes. `neighbors(id)` is sorted
/// ascending. Edges are stored with a < b, sorted.
class HardwareGraph {
   public:
    HardwareGraph() = default;
    /// Throws GraphError on self-loops, duplicate edges, dangling ids,
    /// duplicate qubit ids or rates outside [0, 1].
    HardwareGraph(std::vector<QubitSpec> qubits, std::vector<EdgeSpec> edges);

    const std::vector<QubitSpec> &qubits() const { return qubits_; }
    const std::vector<EdgeSpec> &edges() const { return edges_; }
    size_t num_qubits() const { return qubits_.size(); }
    size_t num_edges() const { return edges_.size(); }
    bool empty() const { return qubits_.empty(); }

    /// One past the largest qubit id.
    int id_bound() const { return static_cast<int>(slot_.size()); }
    bool contains(int id) const { return id >= 0 && id < id_bound() && slot_[id] >= 0; }
    const QubitSpec &qubit(int id) const;
    std::span<const int> neighbors(int id) const;
    /// Returns nullptr when (a, b) is not an edge.
    const EdgeSpec *find_edge(int a, int b) const;

    bool operator==(const HardwareGraph &other) const {
        return qubits_ == other.qubits_ && edges_ == other.edges_;
    }

   private:
    std::vector<QubitSpec> qubits_;
    std::vector<EdgeSpec> edges_;
    std::vector<int> slot_;
    std::vector<std::vector<int>> adjacency_;
    std::vector<std::vector<int>> incident_;
};

/// Parses the JSON graph format. Qubit ids must be exactly 0..n-1.
HardwareGraph parse_hardware_graph(std::string_view text);
std::string serialize_hardware_graph(const HardwareGraph &g);

/// Drops edges above max_gate_error and qubits (with their edges) above
/// max_readout_error.
HardwareGraph apply_dropouts(const HardwareGraph &g, const DropoutPolicy &policy);

HardwareGraph induced_subgraph(const HardwareGraph &g, std::span<const int> ids);

/// Indexed by id; -1 for unreachable or absent qubits.
std::vector<int> bfs_distances(const HardwareGraph &g, int source);

/// Throws GraphError for unknown ids or when some qubit is unreachable.
int eccentricity(const HardwareGraph &g, int u);

/// Minimal-eccentricity qubit, smallest id on ties.
int select_root(const HardwareGraph &g);

int radius(const HardwareGraph &g);

/// Components as sorted id lists, ordered by their smallest id.
std::vector<std::vector<int>> connected_components(const HardwareGraph &g);

/// Largest component; on equal sizes the one with the smallest id wins.
HardwareGraph largest_component(const HardwareGraph &g);

}  // namespace ghzforge

#endif  // GHZFORGE_HWGRAPH_H_
