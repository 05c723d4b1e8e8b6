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

#include "ghzforge/lattices.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ghzforge/rng.h"

namespace ghzforge {

namespace {

std::vector<QubitSpec> bare_qubits(int n) {
    std::vector<QubitSpec> qubits;
    for (int i = 0; i < n; ++i) {
        qubits.push_back({i, 0, 0, 0});
    }
    return qubits;
}

double lognormal(Rng &rng, double median, double sigma) {
    // Box-Muller on our own uniforms keeps the draw portable.
    double u1 = 1.0 - rng.uniform();
    double u2 = rng.uniform();
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2 * std::numbers::pi * u2);
    return median * std::exp(sigma * z);
}

}  // namespace

HardwareGraph path_graph(int n, double gate_error) {
    std::vector<EdgeSpec> edges;
    for (int i = 0; i + 1 < n; ++i) {
        edges.push_back({i, i + 1, gate_error});
    }
    return HardwareGraph(bare_qubits(n), std::move(edges));
}

HardwareGraph star_graph(int n, double gate_error) {
    std::vector<EdgeSpec> edges;
    for (int i = 1; i < n; ++i) {
        edges.push_back({0, i, gate_error});
    }
    return HardwareGraph(bare_qubits(n), std::move(edges));
}

HardwareGraph grid_graph(int rows, int cols, double gate_error) {
    std::vector<EdgeSpec> edges;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            int id = r * cols + c;
            if (c + 1 < cols) edges.push_back({id, id + 1, gate_error});
            if (r + 1 < rows) edges.push_back({id, id + cols, gate_error});
        }
    }
    return HardwareGraph(bare_qubits(rows * cols), std::move(edges));
}

HardwareGraph heavy_hex_graph(const HeavyHexLayout &layout) {
    std::vector<EdgeSpec> edges;
    std::vector<int> row_start(layout.rows);
    int next = 0;
    std::vector<std::vector<std::pair<int, int>>> bridges(std::max(layout.rows - 1, 0));
    for (int r = 0; r < layout.rows; ++r) {
        row_start[r] = next;
        next += layout.row_length;
        if (r + 1 < layout.rows) {
            int offset = (r % 2 == 0) ? layout.even_offset : layout.odd_offset;
            for (int col = offset; col < layout.row_length; col += layout.bridge_stride) {
                bridges[r].push_back({next++, col});
            }
        }
    }
    for (int r = 0; r < layout.rows; ++r) {
        for (int c = 0; c + 1 < layout.row_length; ++c) {
            edges.push_back({row_start[r] + c, row_start[r] + c + 1, 0});
        }
        if (r + 1 < layout.rows) {
            for (auto [id, col] : bridges[r]) {
                edges.push_back({row_start[r] + col, id, 0});
                edges.push_back({id, row_start[r + 1] + col, 0});
            }
        }
    }
    return HardwareGraph(bare_qubits(next), std::move(edges));
}

HardwareGraph heavy_hex_graph(const HeavyHexLayout &layout, const SyntheticRates &rates) {
    return with_synthetic_rates(heavy_hex_graph(layout), rates);
}

HardwareGraph with_synthetic_rates(const HardwareGraph &g, const SyntheticRates &rates) {
    Rng rng(rates.seed);
    auto draw = [&](double median) {
        double v = lognormal(rng, median, rates.spread);
        if (rng.bernoulli(rates.defect_fraction)) {
            v *= 20;
        }
        return std::min(v, 0.5);
    };
    std::vector<QubitSpec> qubits;
    for (const auto &q : g.qubits()) {
        QubitSpec spec{q.id, 0, 0, 0};
        spec.readout_error = draw(rates.readout_error);
        spec.idle_dephasing = draw(rates.idle_dephasing);
        spec.idle_relaxation = draw(rates.idle_relaxation);
        qubits.push_back(spec);
    }
    std::vector<EdgeSpec> edges;
    for (const auto &e : g.edges()) {
        edges.push_back({e.a, e.b, draw(rates.gate_error)});
    }
    return HardwareGraph(std::move(qubits), std::move(edges));
}

}  // namespace ghzforge
