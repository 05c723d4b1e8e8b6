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

#include "ghzforge/hwgraph.h"

#include <algorithm>
#include <deque>
#include <set>

#include "json.hpp"

namespace ghzforge {

namespace {

void check_probability(double p, const std::string &what) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw GraphError(what + " out of range [0, 1]: " + std::to_string(p));
    }
}

}  // namespace

HardwareGraph::HardwareGraph(std::vector<QubitSpec> qubits, std::vector<EdgeSpec> edges)
    : qubits_(std::move(qubits)), edges_(std::move(edges)) {
    std::sort(qubits_.begin(), qubits_.end(), [](const QubitSpec &x, const QubitSpec &y) { return x.id < y.id; });
    int bound = 0;
    for (const auto &q : qubits_) {
        if (q.id < 0) {
            throw GraphError("negative qubit id " + std::to_string(q.id));
        }
        check_probability(q.readout_error, "readout_error of qubit " + std::to_string(q.id));
        check_probability(q.idle_dephasing, "idle_dephasing of qubit " + std::to_string(q.id));
        check_probability(q.idle_relaxation, "idle_relaxation of qubit " + std::to_string(q.id));
        bound = std::max(bound, q.id + 1);
    }
    slot_.assign(bound, -1);
    for (size_t k = 0; k < qubits_.size(); ++k) {
        if (slot_[qubits_[k].id] >= 0) {
            throw GraphError("duplicate qubit id " + std::to_string(qubits_[k].id));
        }
        slot_[qubits_[k].id] = static_cast<int>(k);
    }

    std::set<std::pair<int, int>> seen;
    for (auto &e : edges_) {
        if (e.a == e.b) {
            throw GraphError("self-loop on qubit " + std::to_string(e.a));
        }
        if (!contains(e.a) || !contains(e.b)) {
            throw GraphError("dangling qubit id in edge (" + std::to_string(e.a) + ", " + std::to_string(e.b) + ")");
        }
        check_probability(e.gate_error, "gate_error of edge (" + std::to_string(e.a) + ", " + std::to_string(e.b) + ")");
        if (e.a > e.b) {
            std::swap(e.a, e.b);
        }
        if (!seen.emplace(e.a, e.b).second) {
            throw GraphError("duplicate edge (" + std::to_string(e.a) + ", " + std::to_string(e.b) + ")");
        }
    }
    std::sort(edges_.begin(), edges_.end(),
              [](const EdgeSpec &x, const EdgeSpec &y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });

    adjacency_.assign(bound, {});
    incident_.assign(bound, {});
    for (size_t k = 0; k < edges_.size(); ++k) {
        const auto &e = edges_[k];
        adjacency_[e.a].push_back(e.b);
        adjacency_[e.b].push_back(e.a);
        incident_[e.a].push_back(static_cast<int>(k));
        incident_[e.b].push_back(static_cast<int>(k));
    }
    for (int id = 0; id < bound; ++id) {
        auto &adj = adjacency_[id];
        auto &inc = incident_[id];
        std::vector<size_t> order(adj.size());
        for (size_t k = 0; k < order.size(); ++k) order[k] = k;
        std::sort(order.begin(), order.end(), [&](size_t x, size_t y) { return adj[x] < adj[y]; });
        std::vector<int> sorted_adj, sorted_inc;
        for (size_t k : order) {
            sorted_adj.push_back(adj[k]);
            sorted_inc.push_back(inc[k]);
        }
        adj = std::move(sorted_adj);
        inc = std::move(sorted_inc);
    }
}

const QubitSpec &HardwareGraph::qubit(int id) const {
    if (!contains(id)) {
        throw GraphError("unknown qubit id " + std::to_string(id));
    }
    return qubits_[slot_[id]];
}

std::span<const int> HardwareGraph::neighbors(int id) const {
    if (!contains(id)) {
        throw GraphError("unknown qubit id " + std::to_string(id));
    }
    return adjacency_[id];
}

const EdgeSpec *HardwareGraph::find_edge(int a, int b) const {
    if (!contains(a) || !contains(b)) {
        return nullptr;
    }
    const auto &adj = adjacency_[a];
    auto it = std::lower_bound(adj.begin(), adj.end(), b);
    if (it == adj.end() || *it != b) {
        return nullptr;
    }
    return &edges_[incident_[a][it - adj.begin()]];
}

HardwareGraph parse_hardware_graph(std::string_view text) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error &e) {
        throw GraphError(std::string("malformed graph file: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("qubits") || !doc["qubits"].is_array()) {
        throw GraphError("malformed graph file: missing \"qubits\" array");
    }
    if (doc.contains("edges") && !doc["edges"].is_array()) {
        throw GraphError("malformed graph file: \"edges\" must be an array");
    }
    auto rate = [](const json &obj, const char *key) -> double {
        if (!obj.contains(key)) {
            return 0.0;
        }
        if (!obj[key].is_number()) {
            throw GraphError(std::string("malformed graph file: \"") + key + "\" must be a number");
        }
        return obj[key].get<double>();
    };
    auto integer = [](const json &obj, const char *key) -> int {
        if (!obj.contains(key) || !obj[key].is_number_integer()) {
            throw GraphError(std::string("malformed graph file: missing integer \"") + key + "\"");
        }
        return obj[key].get<int>();
    };

    std::vector<QubitSpec> qubits;
    for (const auto &q : doc["qubits"]) {
        if (!q.is_object()) {
            throw GraphError("malformed graph file: qubit entry must be an object");
        }
        qubits.push_back({integer(q, "id"), rate(q, "readout_error"), rate(q, "idle_dephasing"), rate(q, "idle_relaxation")});
    }
    std::vector<EdgeSpec> edges;
    if (doc.contains("edges")) {
        for (const auto &e : doc["edges"]) {
            if (!e.is_object()) {
                throw GraphError("malformed graph file: edge entry must be an object");
            }
            edges.push_back({integer(e, "a"), integer(e, "b"), rate(e, "gate_error")});
        }
    }
    HardwareGraph g(std::move(qubits), std::move(edges));
    if (g.id_bound() != static_cast<int>(g.num_qubits())) {
        throw GraphError("qubit ids must be contiguous from 0");
    }
    return g;
}

std::string serialize_hardware_graph(const HardwareGraph &g) {
    using nlohmann::ordered_json;
    ordered_json doc;
    doc["qubits"] = ordered_json::array();
    for (const auto &q : g.qubits()) {
        doc["qubits"].push_back({{"id", q.id},
                                 {"readout_error", q.readout_error},
                                 {"idle_dephasing", q.idle_dephasing},
                                 {"idle_relaxation", q.idle_relaxation}});
    }
    doc["edges"] = ordered_json::array();
    for (const auto &e : g.edges()) {
        doc["edges"].push_back({{"a", e.a}, {"b", e.b}, {"gate_error", e.gate_error}});
    }
    return doc.dump(2) + "\n";
}

HardwareGraph apply_dropouts(const HardwareGraph &g, const DropoutPolicy &policy) {
    std::vector<QubitSpec> qubits;
    std::vector<char> kept(g.id_bound(), 0);
    for (const auto &q : g.qubits()) {
        if (q.readout_error <= policy.max_readout_error) {
            qubits.push_back(q);
            kept[q.id] = 1;
        }
    }
    std::vector<EdgeSpec> edges;
    for (const auto &e : g.edges()) {
        if (kept[e.a] && kept[e.b] && e.gate_error <= policy.max_gate_error) {
            edges.push_back(e);
        }
    }
    return HardwareGraph(std::move(qubits), std::move(edges));
}

HardwareGraph induced_subgraph(const HardwareGraph &g, std::span<const int> ids) {
    std::vector<char> kept(g.id_bound(), 0);
    std::vector<QubitSpec> qubits;
    for (int id : ids) {
        if (!kept.at(id)) {
            kept[id] = 1;
            qubits.push_back(g.qubit(id));
        }
    }
    std::vector<EdgeSpec> edges;
    for (const auto &e : g.edges()) {
        if (kept[e.a] && kept[e.b]) {
            edges.push_back(e);
        }
    }
    return HardwareGraph(std::move(qubits), std::move(edges));
}

std::vector<int> bfs_distances(const HardwareGraph &g, int source) {
    if (!g.contains(source)) {
        throw GraphError("unknown qubit id " + std::to_string(source));
    }
    std::vector<int> dist(g.id_bound(), -1);
    std::deque<int> queue{source};
    dist[source] = 0;
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (int v : g.neighbors(u)) {
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    return dist;
}

int eccentricity(const HardwareGraph &g, int u) {
    auto dist = bfs_distances(g, u);
    int ecc = 0;
    for (const auto &q : g.qubits()) {
        if (dist[q.id] < 0) {
            throw GraphError("graph is disconnected: qubit " + std::to_string(q.id) + " unreachable from " +
                             std::to_string(u));
        }
        ecc = std::max(ecc, dist[q.id]);
    }
    return ecc;
}

int select_root(const HardwareGraph &g) {
    if (g.empty()) {
        throw GraphError("cannot select a root in an empty graph");
    }
    int best = -1;
    int best_ecc = 0;
    for (const auto &q : g.qubits()) {
        int e = eccentricity(g, q.id);
        if (best < 0 || e < best_ecc) {
            best = q.id;
            best_ecc = e;
        }
    }
    return best;
}

int radius(const HardwareGraph &g) { return eccentricity(g, select_root(g)); }

std::vector<std::vector<int>> connected_components(const HardwareGraph &g) {
    std::vector<std::vector<int>> out;
    std::vector<char> seen(g.id_bound(), 0);
    for (const auto &q : g.qubits()) {
        if (seen[q.id]) {
            continue;
        }
        std::vector<int> comp;
        std::deque<int> queue{q.id};
        seen[q.id] = 1;
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            comp.push_back(u);
            for (int v : g.neighbors(u)) {
                if (!seen[v]) {
                    seen[v] = 1;
                    queue.push_back(v);
                }
            }
        }
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
    }
    return out;
}

HardwareGraph largest_component(const HardwareGraph &g) {
    auto comps = connected_components(g);
    if (comps.empty()) {
        return g;
    }
    const std::vector<int> *best = &comps.front();
    for (const auto &c : comps) {
        if (c.size() > best->size()) {
            best = &c;
        }
    }
    return induced_subgraph(g, *best);
}

}  // namespace ghzforge
