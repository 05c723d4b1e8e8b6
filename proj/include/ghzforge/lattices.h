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

#ifndef GHZFORGE_LATTICES_H_
#define GHZFORGE_LATTICES_H_

#include <cstdint>

#include "ghzforge/hwgraph.h"

namespace ghzforge {

/// Median rates plus a heavy tail, used to label generated lattices with
/// synthetic calibration data. All draws are reproducible from `seed`.
struct SyntheticRates {
    double gate_error = 3e-3;
    double readout_error = 1e-2;
    double idle_dephasing = 1e-3;
    double idle_relaxation = 5e-4;
    /// Log-normal spread (sigma of the underlying normal).
    double spread = 0.4;
    /// Fraction of elements marked defective, with rates scaled by 20x.
    double defect_fraction = 0.0;
    uint64_t seed = 1;
};

HardwareGraph path_graph(int n, double gate_error = 0);
HardwareGraph star_graph(int n, double gate_error = 0);
HardwareGraph grid_graph(int rows, int cols, double gate_error = 0);

/// Heavy-hex lattice: `rows` horizontal chains of `row_length` qubits, joined
/// between consecutive chains by bridge qubits every `bridge_stride` columns.
/// Bridge columns start at `even_offset` below even rows and `odd_offset`
/// below odd rows. Ids run row by row, each chain followed by the bridges
/// beneath it.
///
/// The defaults reproduce the 156-qubit, 176-coupler lattice:
/// qubits = rows*row_length + (rows-1)*bridges, couplers =
/// rows*(row_length-1) + 2*(rows-1)*bridges.
struct HeavyHexLayout {
    int rows = 8;
    int row_length = 16;
    int bridge_stride = 4;
    int even_offset = 3;
    int odd_offset = 1;
};

HardwareGraph heavy_hex_graph(const HeavyHexLayout &layout);
HardwareGraph heavy_hex_graph(const HeavyHexLayout &layout, const SyntheticRates &rates);

/// Copy of `g` with every rate replaced by a draw from `rates`.
HardwareGraph with_synthetic_rates(const HardwareGraph &g, const SyntheticRates &rates);

}  // namespace ghzforge

#endif  // GHZFORGE_LATTICES_H_
