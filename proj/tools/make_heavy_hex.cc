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

// Writes a heavy-hex hardware graph with synthetic calibration data.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "ghzforge/hwgraph.h"
#include "ghzforge/lattices.h"

int main(int argc, char **argv) {
    using namespace ghzforge;
    CLI::App app{"Generate a heavy-hex graph file"};
    HeavyHexLayout layout;
    SyntheticRates rates;
    std::string out;
    bool plain = false;
    app.add_option("--rows", layout.rows, "Horizontal chains");
    app.add_option("--row-length", layout.row_length, "Qubits per chain");
    app.add_option("--bridge-stride", layout.bridge_stride, "Columns between bridges");
    app.add_option("--seed", rates.seed, "Seed of the synthetic rates");
    app.add_option("--gate-error", rates.gate_error, "Median two-qubit gate error");
    app.add_option("--readout-error", rates.readout_error, "Median readout error");
    app.add_option("--dephasing", rates.idle_dephasing, "Median idle dephasing per layer");
    app.add_option("--relaxation", rates.idle_relaxation, "Median idle relaxation per layer");
    app.add_option("--defect-fraction", rates.defect_fraction, "Fraction of defective elements");
    app.add_flag("--plain", plain, "All rates zero");
    app.add_option("-o,--out", out, "Output file (default: stdout)");
    CLI11_PARSE(app, argc, argv);

    try {
        const HardwareGraph g = plain ? heavy_hex_graph(layout) : heavy_hex_graph(layout, rates);
        const std::string text = serialize_hardware_graph(g);
        if (out.empty()) {
            std::cout << text;
        } else {
            std::ofstream f(out, std::ios::binary);
            if (!f) {
                std::cerr << "cannot write " << out << "\n";
                return 2;
            }
            f << text;
        }
        std::cerr << g.num_qubits() << " qubits, " << g.num_edges() << " edges\n";
    } catch (const std::exception &e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    return 0;
}
