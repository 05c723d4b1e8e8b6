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

#include "ghzforge/circuit.h"

#include <algorithm>
#include <set>
#include <sstream>

#include "json.hpp"

namespace ghzforge {

namespace {

const char *gate_name(GateKind kind) {
    switch (kind) {
        case GateKind::kPrepPlus:
            return "h";
        case GateKind::kCnot:
            return "cx";
        case GateKind::kUncomputeCnot:
            return "uncompute_cx";
        case GateKind::kRecomputeCnot:
            return "recompute_cx";
        case GateKind::kCheckCnot:
            return "check_cx";
        case GateKind::kMeasureZ:
            return "measure_z";
        case GateKind::kBasisRotation:
            return "basis_rotation";
    }
    return "?";
}

GateKind gate_kind_from_name(const std::string &name) {
    static const std::map<std::string, GateKind> kinds = {
        {"h", GateKind::kPrepPlus},
        {"cx", GateKind::kCnot},
        {"uncompute_cx", GateKind::kUncomputeCnot},
        {"recompute_cx", GateKind::kRecomputeCnot},
        {"check_cx", GateKind::kCheckCnot},
        {"measure_z", GateKind::kMeasureZ},
        {"basis_rotation", GateKind::kBasisRotation},
    };
    auto it = kinds.find(name);
    if (it == kinds.end()) {
        throw CircuitError("unknown gate \"" + name + "\"");
    }
    return it->second;
}

bool ends_prep(GateKind kind) {
    return kind == GateKind::kCheckCnot || kind == GateKind::kMeasureZ || kind == GateKind::kBasisRotation;
}

}  // namespace

std::vector<int> Circuit::data_qubits() const {
    std::vector<int> out;
    out.reserve(activation.size());
    for (const auto &[q, layer] : activation) {
        out.push_back(q);
    }
    return out;
}

std::vector<int> Circuit::all_qubits() const {
    auto out = data_qubits();
    auto anc = ancillas;
    std::sort(anc.begin(), anc.end());
    out.insert(out.end(), anc.begin(), anc.end());
    return out;
}

int Circuit::root() const {
    if (layers.empty()) {
        throw CircuitError("empty circuit has no root");
    }
    for (const auto &g : layers.front()) {
        if (g.kind == GateKind::kPrepPlus) {
            return g.q0;
        }
    }
    throw CircuitError("layer 0 holds no PrepPlus");
}

int Circuit::prep_depth() const {
    for (int t = 0; t < depth(); ++t) {
        for (const auto &g : layers[t]) {
            if (ends_prep(g.kind)) {
                return t;
            }
        }
    }
    return depth();
}

bool Circuit::in_ground_span(int q, int t) const {
    auto it = ground_spans.find(q);
    if (it == ground_spans.end()) {
        return false;
    }
    return std::any_of(it->second.begin(), it->second.end(), [t](const Span &s) { return s.contains(t); });
}

bool Circuit::is_error_eligible(int q, int t) const {
    auto it = activation.find(q);
    return it != activation.end() && t >= it->second && t < prep_depth() && !in_ground_span(q, t);
}

std::vector<SpacetimeLocation> Circuit::error_eligible_locations() const {
    std::vector<SpacetimeLocation> out;
    const int prep = prep_depth();
    for (const auto &[q, start] : activation) {
        for (int t = start; t < prep; ++t) {
            if (!in_ground_span(q, t)) {
                out.push_back({q, t});
            }
        }
    }
    return out;
}

void validate_circuit(const Circuit &c) {
    if (c.layers.empty()) {
        throw CircuitError("circuit has no layers");
    }
    if (c.n_data != static_cast<int>(c.activation.size())) {
        throw CircuitError("n_data does not match the activation map");
    }
    const std::set<int> ancillas(c.ancillas.begin(), c.ancillas.end());
    if (ancillas.size() != c.ancillas.size()) {
        throw CircuitError("duplicate ancilla");
    }
    std::map<int, int> seen_activation;
    int prep_count = 0;
    bool rotations_started = false;
    for (int t = 0; t < c.depth(); ++t) {
        std::set<int> busy;
        for (const auto &g : c.layers[t]) {
            auto claim = [&](int q) {
                if (q < 0) {
                    throw CircuitError("negative qubit id in layer " + std::to_string(t));
                }
                if (!busy.insert(q).second) {
                    throw CircuitError("qubit " + std::to_string(q) + " used twice in layer " + std::to_string(t));
                }
            };
            claim(g.q0);
            if (g.is_cnot()) {
                if (g.q0 == g.q1) {
                    throw CircuitError("CNOT with control == target in layer " + std::to_string(t));
                }
                claim(g.q1);
                if (rotations_started) {
                    throw CircuitError("CNOT after basis rotations in layer " + std::to_string(t));
                }
            }
            switch (g.kind) {
                case GateKind::kPrepPlus:
                    if (t != 0) {
                        throw CircuitError("PrepPlus outside layer 0");
                    }
                    ++prep_count;
                    seen_activation[g.q0] = 0;
                    break;
                case GateKind::kCnot:
                    if (seen_activation.count(g.q1)) {
                        throw CircuitError("qubit " + std::to_string(g.q1) + " activated twice");
                    }
                    seen_activation[g.q1] = t;
                    break;
                case GateKind::kCheckCnot:
                    if (!ancillas.count(g.q1)) {
                        throw CircuitError("check CNOT targets non-ancilla " + std::to_string(g.q1));
                    }
                    break;
                case GateKind::kBasisRotation:
                    rotations_started = true;
                    break;
                default:
                    break;
            }
        }
    }
    if (prep_count != 1) {
        throw CircuitError("expected exactly one PrepPlus, found " + std::to_string(prep_count));
    }
    if (seen_activation != c.activation) {
        throw CircuitError("activation map disagrees with the circuit's CNOTs");
    }
    for (int a : c.ancillas) {
        if (c.activation.count(a)) {
            throw CircuitError("qubit " + std::to_string(a) + " is both data and ancilla");
        }
    }
}

DepthStats depth_stats(const Circuit &c) {
    DepthStats s;
    s.total_depth = c.depth();
    const int prep = c.prep_depth();
    for (int t = 0; t < c.depth(); ++t) {
        bool has_cnot = std::any_of(c.layers[t].begin(), c.layers[t].end(), [](const Gate &g) { return g.is_cnot(); });
        if (has_cnot) {
            ++s.cnot_depth;
            if (t < prep) {
                ++s.prep_cnot_depth;
            }
        }
    }
    return s;
}

std::string emit_circuit(const Circuit &c, CircuitFormat format) {
    if (format == CircuitFormat::kCanonicalJson) {
        using nlohmann::json;
        json doc;
        doc["n_data"] = c.n_data;
        auto anc = c.ancillas;
        std::sort(anc.begin(), anc.end());
        doc["ancillas"] = anc;
        doc["activation"] = json::array();
        for (const auto &[q, layer] : c.activation) {
            doc["activation"].push_back({q, layer});
        }
        doc["ground_spans"] = json::array();
        for (const auto &[q, spans] : c.ground_spans) {
            for (const auto &s : spans) {
                doc["ground_spans"].push_back({q, s.begin, s.end});
            }
        }
        doc["layers"] = json::array();
        for (const auto &layer : c.layers) {
            json gates = json::array();
            for (const auto &g : layer) {
                json entry;
                entry["gate"] = gate_name(g.kind);
                entry["qubits"] = g.q1 >= 0 ? json::array({g.q0, g.q1}) : json::array({g.q0});
                if (g.kind == GateKind::kBasisRotation) {
                    entry["phi"] = g.phi;
                }
                gates.push_back(std::move(entry));
            }
            doc["layers"].push_back(std::move(gates));
        }
        return doc.dump(1) + "\n";
    }

    std::ostringstream out;
    out.precision(17);
    for (const auto &layer : c.layers) {
        for (const auto &g : layer) {
            switch (g.kind) {
                case GateKind::kPrepPlus:
                    out << "h q" << g.q0 << "\n";
                    break;
                case GateKind::kCnot:
                    out << "cx q" << g.q0 << " q" << g.q1 << "\n";
                    break;
                case GateKind::kUncomputeCnot:
                    out << "cx q" << g.q0 << " q" << g.q1 << " // uncompute\n";
                    break;
                case GateKind::kRecomputeCnot:
                    out << "cx q" << g.q0 << " q" << g.q1 << " // recompute\n";
                    break;
                case GateKind::kCheckCnot:
                    out << "cx q" << g.q0 << " q" << g.q1 << " // check\n";
                    break;
                case GateKind::kMeasureZ:
                    out << "measure q" << g.q0 << "\n";
                    break;
                case GateKind::kBasisRotation:
                    out << "parity_basis(" << g.phi << ") q" << g.q0 << "\n";
                    break;
            }
        }
        out << "barrier\n";
    }
    return out.str();
}

Circuit parse_circuit_json(std::string_view text) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error &e) {
        throw CircuitError(std::string("malformed circuit file: ") + e.what());
    }
    Circuit c;
    try {
        c.n_data = doc.at("n_data").get<int>();
        c.ancillas = doc.at("ancillas").get<std::vector<int>>();
        for (const auto &pair : doc.at("activation")) {
            c.activation[pair.at(0).get<int>()] = pair.at(1).get<int>();
        }
        for (const auto &triple : doc.at("ground_spans")) {
            c.ground_spans[triple.at(0).get<int>()].push_back({triple.at(1).get<int>(), triple.at(2).get<int>()});
        }
        for (const auto &layer : doc.at("layers")) {
            std::vector<Gate> gates;
            for (const auto &entry : layer) {
                Gate g;
                g.kind = gate_kind_from_name(entry.at("gate").get<std::string>());
                auto qubits = entry.at("qubits").get<std::vector<int>>();
                const size_t arity = g.is_cnot() ? 2 : 1;
                if (qubits.size() != arity) {
                    throw CircuitError("gate \"" + entry.at("gate").get<std::string>() + "\" expects " +
                                       std::to_string(arity) + " qubits");
                }
                g.q0 = qubits[0];
                g.q1 = arity == 2 ? qubits[1] : -1;
                if (entry.contains("phi")) {
                    g.phi = entry.at("phi").get<double>();
                }
                gates.push_back(g);
            }
            c.layers.push_back(std::move(gates));
        }
    } catch (const json::exception &e) {
        throw CircuitError(std::string("malformed circuit file: ") + e.what());
    }
    validate_circuit(c);
    return c;
}

Circuit with_parity_rotation(const Circuit &c, double phi) {
    Circuit out = c;
    std::vector<Gate> layer;
    for (int q : c.data_qubits()) {
        layer.push_back(Gate::basis_rotation(q, phi));
    }
    out.layers.push_back(std::move(layer));
    return out;
}

}  // namespace ghzforge
