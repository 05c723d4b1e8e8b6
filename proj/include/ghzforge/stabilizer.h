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

#ifndef GHZFORGE_STABILIZER_H_
#define GHZFORGE_STABILIZER_H_

#include <string>
#include <vector>

namespace ghzforge {

/// Element of the GHZ stabilizer group on N data qubits.
///
/// Diagonal labels (x_part false) are Z on `support`. Off-diagonal labels are
/// X on every qubit with X replaced by Y on `support`. Supports hold data
/// positions (0..N-1), ascending, with even cardinality.
struct StabilizerLabel {
    bool x_part = false;
    std::vector<int> support;

    /// +1 for diagonal labels, (-1)^{|support|/2} otherwise.
    int sign() const {
        if (!x_part) {
            return 1;
        }
        return (support.size() / 2) % 2 == 0 ? 1 : -1;
    }

    /// Pauli string such as "-XYYX" or "+ZIZI".
    std::string str(int n) const {
        std::string s(static_cast<size_t>(n), x_part ? 'X' : 'I');
        for (int k : support) {
            s[k] = x_part ? 'Y' : 'Z';
        }
        return (sign() > 0 ? "+" : "-") + s;
    }

    bool operator==(const StabilizerLabel &) const = default;
};

}  // namespace ghzforge

#endif  // GHZFORGE_STABILIZER_H_
