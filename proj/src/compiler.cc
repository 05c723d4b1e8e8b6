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

#include "ghzforge/compiler.h"

#include <algorithm>
#include <deque>
#include <sstream>

#include <spdlog/spdlog.h>

#include "ghzforge/parallel.h"
#include "ghzforge/rng.h"

namespace ghzforge {

bool DetectingRegion::contains(SpacetimeLocation loc) const {
    return std::binary_search(locations.begin(), locations.end(), loc);
}

GhzTree grow_tree(const HardwareGraph &g, int root, int n_data, const std::set<int> &blocked) {
    if (!g.contains(root)) {
        throw CompileError("root " + std::to_string(root) + " is not in the graph");
    }
    if (blocked.count(root)) {
        throw CompileError("root " + std::to_string(root) + " is blocked");
    }
    if (n_data < 1) {
        throw CompileError("n_data must be positive");
    }
    GhzTree tree;
    tree.root = root;
    tree.order.push_back(root);
    std::vector<char> visited(g.id_bound(), 0);
    visited[root] = 1;
    std::deque<int> queue{root};
    const auto n = static_cast<size_t>(n_data);
    while (!queue.empty() && tree.order.size() < n) {
        const int u = queue.front();
        queue.pop_front();
        std::vector<std::pair<double, int>> frontier;
        for (int v : g.neighbors(u)) {
            if (!visited[v] && !blocked.count(v)) {
                frontier.emplace_back(g.find_edge(u, v)->gate_error, v);
            }
        }
        std::sort(frontier.begin(), frontier.end());
        for (const auto &[err, v] : frontier) {
            if (tree.order.size() == n) {
                break;
            }
            visited[v] = 1;
            tree.parent[v] = u;
            tree.children[u].push_back(v);
            tree.order.push_back(v);
            queue.push_back(v);
        }
    }
    if (tree.order.size() < n) {
        throw CompileError("only " + std::to_string(tree.order.size()) + " unblocked qubits reachable from root " +
                           std::to_string(root) + ", need " + std::to_string(n_data));
    }
    return tree;
}

Circuit build_prep_circuit(const GhzTree &tree) {
    std::map<int, int> height;
    std::map<int, int> rank;
    for (size_t k = 0; k < tree.order.size(); ++k) {
        rank[tree.order[k]] = static_cast<int>(k);
    }
    for (auto it = tree.order.rbegin(); it != tree.order.rend(); ++it) {
        int h = 0;
        if (auto ch = tree.children.find(*it); ch != tree.children.end()) {
            for (int c : ch->second) {
                h = std::max(h, height[c] + 1);
            }
        }
        height[*it] = h;
    }

    Circuit c;
    c.n_data = static_cast<int>(tree.order.size());
    c.activation[tree.root] = 0;
    std::vector<std::tuple<int, int, int>> cnots;  // layer, control, target
    int depth = 1;
    for (int u : tree.order) {
        auto ch = tree.children.find(u);
        if (ch == tree.children.end()) {
            continue;
        }
        std::vector<int> kids = ch->second;
        std::stable_sort(kids.begin(), kids.end(), [&](int a, int b) {
            if (height[a] != height[b]) return height[a] > height[b];
            return rank[a] < rank[b];
        });
        int layer = c.activation.at(u) + 1;
        for (int v : kids) {
            c.activation[v] = layer;
            cnots.emplace_back(layer, u, v);
            depth = std::max(depth, layer + 1);
            ++layer;
        }
    }
    c.layers.assign(depth, {});
    c.layers[0].push_back(Gate::prep_plus(tree.root));
    for (const auto &[layer, control, target] : cnots) {
        c.layers[layer].push_back(Gate::cnot(control, target));
    }
    for (auto &layer : c.layers) {
        std::sort(layer.begin(), layer.end(), [](const Gate &a, const Gate &b) { return a.q0 < b.q0; });
    }
    return c;
}

DetectingRegion detecting_region(const SpacetimeTree &tree, int i, int j) {
    if (i == j) {
        throw CompileError("detecting region needs two distinct qubits");
    }
    const int a = tree.leaf(i);
    const int b = tree.leaf(j);
    const int top = tree.lca(a, b);
    DetectingRegion region;
    for (int start : {a, b}) {
        for (int n = start; n != top; n = tree.parent(n)) {
            region.locations.push_back(tree.nodes()[n]);
        }
    }
    std::sort(region.locations.begin(), region.locations.end());
    return region;
}

DetectingRegion back_propagator(const Circuit &c, int i, int j) {
    if (i == j) {
        throw CompileError("back-propagator needs two distinct qubits");
    }
    if (!c.activation.count(i) || !c.activation.count(j)) {
        throw CompileError("check qubits must be data qubits");
    }
    std::map<int, bool> z{{i, true}, {j, true}};
    DetectingRegion region;
    for (int t = c.prep_depth() - 1; t >= 0; --t) {
        for (const auto &[q, on] : z) {
            if (on && c.is_error_eligible(q, t)) {
                region.locations.push_back({q, t});
            }
        }
        for (const auto &g : c.layers[t]) {
            if (!g.is_cnot()) {
                continue;
            }
            z[g.q0] = z[g.q0] != z[g.q1];
            // The target of a first excitation sits in |0> with no earlier
            // gates or fault locations, so its Z acts trivially.
            if (g.kind == GateKind::kCnot) {
                z[g.q1] = false;
            }
        }
    }
    std::sort(region.locations.begin(), region.locations.end());
    return region;
}

std::vector<ParityCheck> allocate_checks(const HardwareGraph &g, const GhzTree &tree, const Circuit &prep) {
    const SpacetimeTree st = build_spacetime_tree(prep);
    struct Candidate {
        int size;
        int ancilla;
        int i;
        int j;
    };
    std::vector<Candidate> candidates;
    auto is_parent_of = [&](int p, int c) {
        auto it = tree.parent.find(c);
        return it != tree.parent.end() && it->second == p;
    };
    for (const auto &q : g.qubits()) {
        const int a = q.id;
        if (tree.contains(a)) {
            continue;
        }
        std::vector<int> near;
        for (int v : g.neighbors(a)) {
            if (tree.contains(v)) {
                near.push_back(v);
            }
        }
        for (size_t x = 0; x < near.size(); ++x) {
            for (size_t y = x + 1; y < near.size(); ++y) {
                const int i = near[x];
                const int j = near[y];
                if (is_parent_of(i, j) || is_parent_of(j, i)) {
                    continue;
                }
                const int li = st.leaf(i);
                const int lj = st.leaf(j);
                const int size = st.node_depth(li) + st.node_depth(lj) - 2 * st.node_depth(st.lca(li, lj));
                if (size > 0) {
                    candidates.push_back({size, a, i, j});
                }
            }
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate &x, const Candidate &y) {
        if (x.size != y.size) return x.size > y.size;
        return std::tie(x.ancilla, x.i, x.j) < std::tie(y.ancilla, y.i, y.j);
    });
    std::set<int> used;
    std::vector<ParityCheck> checks;
    for (const auto &cand : candidates) {
        if (used.count(cand.ancilla) || used.count(cand.i) || used.count(cand.j)) {
            continue;
        }
        used.insert({cand.ancilla, cand.i, cand.j});
        checks.push_back({cand.ancilla, cand.i, cand.j, detecting_region(st, cand.i, cand.j)});
    }
    std::sort(checks.begin(), checks.end(), [](const ParityCheck &x, const ParityCheck &y) { return x.ancilla < y.ancilla; });
    return checks;
}

std::map<SpacetimeLocation, double> location_weights(const HardwareGraph &g, const Circuit &c) {
    std::map<SpacetimeLocation, double> w;
    for (const auto &loc : c.error_eligible_locations()) {
        double p = g.qubit(loc.qubit).idle_relaxation;
        for (const auto &gate : c.layers[loc.layer]) {
            if (gate.is_cnot() && gate.acts_on(loc.qubit)) {
                // 8 of the 15 non-identity two-qubit Paulis are X or Y on a given operand.
                const EdgeSpec *e = g.find_edge(gate.q0, gate.q1);
                p = e ? e->gate_error * 8.0 / 15.0 : 0.0;
            }
        }
        w[loc] = p;
    }
    return w;
}

CoverageReport coverage(const Circuit &c, const std::vector<ParityCheck> &checks,
                        const std::map<SpacetimeLocation, double> *weights) {
    CoverageReport report;
    const auto w_err = c.error_eligible_locations();
    std::set<SpacetimeLocation> covered;
    for (const auto &chk : checks) {
        report.per_check.push_back(chk.region.size());
        for (const auto &loc : chk.region.locations) {
            if (c.is_error_eligible(loc.qubit, loc.layer)) {
                covered.insert(loc);
            }
        }
    }
    report.total = w_err.size();
    report.covered = covered.size();
    report.fraction = report.total ? static_cast<double>(report.covered) / static_cast<double>(report.total) : 0.0;
    if (weights) {
        double num = 0, den = 0;
        for (const auto &loc : w_err) {
            auto it = weights->find(loc);
            const double w = it == weights->end() ? 0.0 : it->second;
            den += w;
            if (covered.count(loc)) {
                num += w;
            }
        }
        report.weighted_fraction = den > 0 ? num / den : 0.0;
    }
    return report;
}

Circuit append_checks(const Circuit &prep, const std::vector<ParityCheck> &checks) {
    if (prep.prep_depth() != prep.depth()) {
        throw CompileError("circuit already holds checks");
    }
    Circuit c = prep;
    if (checks.empty()) {
        return c;
    }
    std::vector<Gate> first, second, measure;
    for (const auto &chk : checks) {
        first.push_back(Gate::check(chk.i, chk.ancilla));
        second.push_back(Gate::check(chk.j, chk.ancilla));
        measure.push_back(Gate::measure_z(chk.ancilla));
        c.ancillas.push_back(chk.ancilla);
    }
    std::sort(c.ancillas.begin(), c.ancillas.end());
    c.layers.push_back(std::move(first));
    c.layers.push_back(std::move(second));
    c.layers.push_back(std::move(measure));
    validate_circuit(c);
    return c;
}

std::vector<ParityCheck> checks_from_circuit(const Circuit &c) {
    std::map<int, std::vector<int>> by_ancilla;
    for (const auto &layer : c.layers) {
        for (const auto &g : layer) {
            if (g.kind == GateKind::kCheckCnot) {
                by_ancilla[g.q1].push_back(g.q0);
            }
        }
    }
    std::vector<ParityCheck> checks;
    for (int a : c.ancillas) {
        auto it = by_ancilla.find(a);
        if (it == by_ancilla.end() || it->second.size() != 2) {
            throw CompileError("ancilla " + std::to_string(a) + " does not hold exactly two check CNOTs");
        }
        const int i = it->second[0];
        const int j = it->second[1];
        checks.push_back({a, i, j, back_propagator(c, i, j)});
    }
    std::sort(checks.begin(), checks.end(), [](const ParityCheck &x, const ParityCheck &y) { return x.ancilla < y.ancilla; });
    return checks;
}

Circuit insert_uncompute(const Circuit &prep, const GhzTree &tree, int threshold, int max_qubits) {
    if (prep.prep_depth() != prep.depth()) {
        throw CompileError("insert_uncompute expects a circuit without checks");
    }
    if (threshold < 1) {
        throw CompileError("uncompute threshold must be at least 1");
    }
    Circuit out = prep;
    const int original_depth = prep.depth();
    auto busy = [&](int q, int t) {
        return std::any_of(out.layers[t].begin(), out.layers[t].end(), [q](const Gate &g) { return g.acts_on(q); });
    };
    std::map<int, int> last_cnot;
    for (int t = 0; t < prep.depth(); ++t) {
        for (const auto &g : prep.layers[t]) {
            if (g.is_cnot()) {
                last_cnot[g.q0] = t;
                last_cnot[g.q1] = t;
            }
        }
    }

    std::set<int> used;
    int done = 0;
    for (int q : tree.order) {
        if (max_qubits >= 0 && done >= max_qubits) {
            break;
        }
        auto kids = tree.children.find(q);
        if (used.count(q) || kids == tree.children.end() || kids->second.empty()) {
            continue;
        }
        const int last = last_cnot.at(q);
        if (original_depth - 1 - last <= threshold) {
            continue;
        }
        std::vector<int> partners = kids->second;
        if (auto p = tree.parent.find(q); p != tree.parent.end()) {
            partners.push_back(p->second);
        }
        int best_partner = -1;
        int best_layer = 0;
        for (int p : partners) {
            if (used.count(p)) {
                continue;
            }
            for (int t = last + 1; t < out.depth(); ++t) {
                if (out.activation.at(p) <= t - 1 && !busy(p, t) && !busy(q, t)) {
                    if (best_partner < 0 || t < best_layer) {
                        best_partner = p;
                        best_layer = t;
                    }
                    break;
                }
            }
        }
        if (best_partner < 0) {
            if (q == tree.root) {
                throw CompileError("no eligible neighbour is free to uncompute the root");
            }
            continue;
        }
        const int p = best_partner;
        const int t_u = best_layer;
        int t_r = -1;
        for (int t = out.depth() - 1; t > t_u; --t) {
            if (!busy(p, t) && !busy(q, t)) {
                t_r = t;
                break;
            }
        }
        if (t_r < 0) {
            out.layers.emplace_back();
            t_r = out.depth() - 1;
        }
        out.layers[t_u].push_back(Gate::uncompute(p, q));
        out.layers[t_r].push_back(Gate::recompute(p, q));
        out.ground_spans[q].push_back({t_u, t_r});
        used.insert(q);
        used.insert(p);
        ++done;
        spdlog::debug("uncompute qubit {} via {}: ground span [{}, {})", q, p, t_u, t_r);
    }
    for (auto &layer : out.layers) {
        std::sort(layer.begin(), layer.end(), [](const Gate &a, const Gate &b) { return a.q0 < b.q0; });
    }
    validate_circuit(out);
    return out;
}

namespace {

struct TrialOutcome {
    bool ok = false;
    GhzTree tree;
    Circuit prep;
    std::vector<ParityCheck> checks;
    CoverageReport cover;
    double edge_error_sum = 0;
};

double score(const TrialOutcome &t, bool weighted) {
    return weighted ? t.cover.weighted_fraction.value_or(0.0) : t.cover.fraction;
}

/// True when `a` beats `b`; later trials never win ties.
bool better(const TrialOutcome &a, const TrialOutcome &b, bool weighted) {
    if (!b.ok) return a.ok;
    if (!a.ok) return false;
    if (weighted) {
        if (score(a, true) != score(b, true)) return score(a, true) > score(b, true);
    } else {
        // Exact rational comparison of covered/total.
        const auto lhs = a.cover.covered * b.cover.total;
        const auto rhs = b.cover.covered * a.cover.total;
        if (lhs != rhs) return lhs > rhs;
    }
    if (a.checks.size() != b.checks.size()) return a.checks.size() > b.checks.size();
    return a.edge_error_sum < b.edge_error_sum;
}

}  // namespace

CompileResult randomized_compile(const HardwareGraph &g, const CompileConfig &cfg) {
    if (cfg.trials < 1) {
        throw CompileError("trials must be at least 1");
    }
    if (!(cfg.block_probability >= 0.0 && cfg.block_probability < 1.0)) {
        throw CompileError("block_probability must lie in [0, 1)");
    }
    const HardwareGraph work = largest_component(apply_dropouts(g, cfg.dropout));
    if (static_cast<int>(work.num_qubits()) < cfg.n_data + 1) {
        throw CompileError("graph has " + std::to_string(work.num_qubits()) + " usable qubits, need n_data + 1 = " +
                           std::to_string(cfg.n_data + 1));
    }
    const int root = select_root(work);

    std::vector<TrialOutcome> outcomes(cfg.trials);
    std::vector<TrialRecord> log(cfg.trials);
    parallel_for(static_cast<size_t>(cfg.trials), cfg.threads, [&](size_t t) {
        const uint64_t seed = derive_seed(cfg.seed, Stream::kTrial, t);
        Rng rng(seed);
        std::set<int> blocked;
        for (const auto &q : work.qubits()) {
            if (q.id != root && rng.bernoulli(cfg.block_probability)) {
                blocked.insert(q.id);
            }
        }
        TrialRecord &rec = log[t];
        rec.trial = static_cast<int>(t);
        rec.seed = seed;
        TrialOutcome &out = outcomes[t];
        try {
            out.tree = grow_tree(work, root, cfg.n_data, blocked);
        } catch (const CompileError &) {
            return;
        }
        out.prep = build_prep_circuit(out.tree);
        out.checks = allocate_checks(work, out.tree, out.prep);
        if (cfg.weighted_coverage) {
            const auto w = location_weights(work, out.prep);
            out.cover = coverage(out.prep, out.checks, &w);
        } else {
            out.cover = coverage(out.prep, out.checks);
        }
        for (const auto &[child, parent] : out.tree.parent) {
            out.edge_error_sum += work.find_edge(child, parent)->gate_error;
        }
        out.ok = true;
        rec.accepted = true;
        rec.n_checks = static_cast<int>(out.checks.size());
        rec.coverage = score(out, cfg.weighted_coverage);
        rec.cnot_depth = depth_stats(out.prep).cnot_depth;
    });

    int best = -1;
    for (int t = 0; t < cfg.trials; ++t) {
        if (outcomes[t].ok && (best < 0 || better(outcomes[t], outcomes[best], cfg.weighted_coverage))) {
            best = t;
        }
    }
    if (best < 0) {
        throw CompileError("no trial reached " + std::to_string(cfg.n_data) + " qubits");
    }
    spdlog::debug("best trial {} with {} checks, coverage {}", best, outcomes[best].checks.size(),
                  outcomes[best].cover.fraction);

    CompileResult result;
    TrialOutcome &win = outcomes[best];
    result.root = root;
    result.best_trial = best;
    result.trial_log = std::move(log);
    result.search_coverage = win.cover;
    result.tree = win.tree;
    Circuit prep = win.prep;
    if (cfg.uncompute) {
        prep = insert_uncompute(prep, win.tree, cfg.uncompute_idle_threshold, cfg.uncompute_max_qubits);
        for (const auto &[q, spans] : prep.ground_spans) {
            result.uncomputed.push_back(q);
        }
    }
    result.checks = win.checks;
    result.circuit = append_checks(prep, result.checks);
    for (auto &chk : result.checks) {
        chk.region = back_propagator(result.circuit, chk.i, chk.j);
    }
    if (cfg.weighted_coverage) {
        const auto w = location_weights(work, result.circuit);
        result.coverage = coverage(result.circuit, result.checks, &w);
    } else {
        result.coverage = coverage(result.circuit, result.checks);
    }
    return result;
}

std::string trial_log_csv(const std::vector<TrialRecord> &log) {
    std::ostringstream out;
    out << "trial,seed,n_checks,coverage,cnot_depth,accepted\n";
    out.precision(10);
    for (const auto &r : log) {
        out << r.trial << ',' << r.seed << ',' << r.n_checks << ',' << r.coverage << ',' << r.cnot_depth << ','
            << (r.accepted ? 1 : 0) << '\n';
    }
    return out.str();
}

}  // namespace ghzforge
