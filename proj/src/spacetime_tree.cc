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

#include <algorithm>
#include <set>

#include "ghzforge/circuit.h"

namespace ghzforge {

std::optional<int> SpacetimeTree::find(SpacetimeLocation loc) const {
    auto it = data_pos_.find(loc.qubit);
    if (it == data_pos_.end() || loc.layer < 0 || loc.layer >= prep_depth_) {
        return std::nullopt;
    }
    int node = grid_[static_cast<size_t>(it->second) * prep_depth_ + loc.layer];
    if (node < 0) {
        return std::nullopt;
    }
    return node;
}

int SpacetimeTree::leaf(int q) const {
    auto it = leaf_.find(q);
    if (it == leaf_.end()) {
        throw CircuitError("qubit " + std::to_string(q) + " is not a data qubit of the tree");
    }
    return it->second;
}

int SpacetimeTree::lca(int a, int b) const {
    while (depth_[a] > depth_[b]) a = parent_[a];
    while (depth_[b] > depth_[a]) b = parent_[b];
    while (a != b) {
        a = parent_[a];
        b = parent_[b];
    }
    return a;
}

SpacetimeTree build_spacetime_tree(const Circuit &c) {
    validate_circuit(c);
    SpacetimeTree tree;
    const int prep = c.prep_depth();
    const auto data = c.data_qubits();
    tree.prep_depth_ = prep;
    for (size_t k = 0; k < data.size(); ++k) {
        tree.data_pos_[data[k]] = static_cast<int>(k);
    }
    tree.grid_.assign(data.size() * static_cast<size_t>(prep), -1);

    auto add_node = [&](int q, int t, int parent, TreeEdgeKind kind) {
        int id = static_cast<int>(tree.nodes_.size());
        tree.nodes_.push_back({q, t});
        tree.parent_.push_back(parent);
        tree.kind_.push_back(kind);
        tree.depth_.push_back(parent < 0 ? 0 : tree.depth_[parent] + 1);
        tree.grid_[static_cast<size_t>(tree.data_pos_.at(q)) * prep + t] = id;
        return id;
    };

    std::map<int, int> current;  // excited data qubit -> node at the previous layer
    const int root = c.root();
    current[root] = add_node(root, 0, -1, TreeEdgeKind::kWire);

    for (int t = 1; t < prep; ++t) {
        std::map<int, int> next;
        std::set<int> touched;
        for (const auto &g : c.layers[t]) {
            if (g.kind == GateKind::kPrepPlus) {
                throw CircuitError("PrepPlus outside layer 0");
            }
            if (!g.is_cnot()) {
                continue;
            }
            if (!tree.data_pos_.count(g.q0) || !tree.data_pos_.count(g.q1)) {
                throw CircuitError("prep CNOT on a non-data qubit in layer " + std::to_string(t));
            }
            auto control = current.find(g.q0);
            if (control == current.end()) {
                throw CircuitError("CNOT in layer " + std::to_string(t) + " uses unexcited control " +
                                   std::to_string(g.q0) + " (entangling order is not a tree)");
            }
            const bool target_excited = current.count(g.q1) > 0;
            touched.insert(g.q0);
            touched.insert(g.q1);
            switch (g.kind) {
                case GateKind::kCnot:
                case GateKind::kRecomputeCnot:
                    if (target_excited) {
                        throw CircuitError("CNOT in layer " + std::to_string(t) + " excites qubit " +
                                           std::to_string(g.q1) + " which is already excited");
                    }
                    if (g.kind == GateKind::kRecomputeCnot) {
                        tree.has_uncompute_ = true;
                    }
                    next[g.q1] = add_node(g.q1, t, control->second, TreeEdgeKind::kBranch);
                    next[g.q0] = add_node(g.q0, t, control->second, TreeEdgeKind::kWire);
                    break;
                case GateKind::kUncomputeCnot:
                    if (!target_excited) {
                        throw CircuitError("uncompute in layer " + std::to_string(t) + " targets unexcited qubit " +
                                           std::to_string(g.q1));
                    }
                    tree.has_uncompute_ = true;
                    next[g.q0] = add_node(g.q0, t, control->second, TreeEdgeKind::kWire);
                    break;
                default:
                    break;
            }
        }
        for (const auto &[q, node] : current) {
            if (!touched.count(q)) {
                next[q] = add_node(q, t, node, TreeEdgeKind::kWire);
            }
        }
        current = std::move(next);
    }

    for (int q : data) {
        auto it = current.find(q);
        if (it == current.end()) {
            throw CircuitError("data qubit " + std::to_string(q) + " is not excited at the end of preparation");
        }
        tree.leaf_[q] = it->second;
    }
    for (int q : data) {
        for (int t = 0; t < prep; ++t) {
            const bool in_tree = tree.find({q, t}).has_value();
            if (in_tree != c.is_error_eligible(q, t)) {
                throw CircuitError("ground spans or activation of qubit " + std::to_string(q) +
                                   " disagree with its gates at layer " + std::to_string(t));
            }
        }
    }
    return tree;
}

}  // namespace ghzforge
