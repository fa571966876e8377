// Copyright 2026 The tmsstats Authors
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

#ifndef TMSSTATS_PLANNER_H
#define TMSSTATS_PLANNER_H

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tmsstats/circuit.h"
#include "tmsstats/cluster_graph.h"
#include "tmsstats/observable.h"

namespace tms {

/// A circuit together with the cluster graph it is predicted to realize.
struct Construction {
    Circuit circuit;
    ClusterGraph graph;
    /// False when the graph is wider than the moment engine can verify.
    bool verifiable = true;
};

/// Builds vacuum-seeded circuits out of two-mode-squeezed Bell pairs, Hadamard
/// rotations and polarizing beamsplitters. Squeezers are kept ahead of every
/// other gate, so emitted circuits are always Fock-oracle compatible.
class ClusterBuilder {
   public:
    /// Bell pair S_{a_h b_h}(r_h, 0) S_{a_v b_v}(r_v, phi) on two new spatial
    /// modes. Returns their registry indices.
    std::pair<size_t, size_t> add_bell(double r_h, double r_v, double phi = 0) {
        if (!(r_h >= 0) || !(r_v >= 0)) {
            throw std::invalid_argument("squeezing must be >= 0");
        }
        size_t a = modes_.add_polarized(default_mode_name(modes_.num_spatial()));
        size_t b = modes_.add_polarized(default_mode_name(modes_.num_spatial()));
        auto pa = modes_.polarized(a);
        auto pb = modes_.polarized(b);
        sources_.push_back(gate::Squeeze{pa.h, pb.h, r_h, 0.0});
        sources_.push_back(gate::Squeeze{pa.v, pb.v, r_v, phi});
        return {a, b};
    }

    /// Bell pair plus a Hadamard on the polarization of the first mode; a
    /// two-vertex cluster a - b.
    std::pair<size_t, size_t> add_cluster2(double r) {
        auto [a, b] = add_bell(r, r, 0);
        hadamard(a);
        size_t va = graph_.add_vertex(a);
        size_t vb = graph_.add_vertex(b);
        graph_.add_edge(va, vb);
        return {a, b};
    }

    void hadamard(size_t spatial) {
        auto p = modes_.polarized(spatial);
        ops_.push_back(gate::Hadamard{p.h, p.v});
    }

    void pbs(size_t first, size_t second) {
        ops_.push_back(gate::Pbs{first, second});
    }

    /// PBS on two spatial modes followed by a Hadamard on `target` (one of the
    /// two); updates the graph by fusion.
    void pbs_op(size_t first, size_t second, size_t target) {
        if (target != first && target != second) {
            throw std::invalid_argument("pbs operation: the Hadamard target must be one of the two PBS modes");
        }
        size_t other = target == first ? second : first;
        size_t vt = graph_.vertex_of(target);
        size_t vo = graph_.vertex_of(other);
        if (vt == ClusterGraph::npos || vo == ClusterGraph::npos) {
            throw std::invalid_argument("pbs operation: both modes must be cluster vertices");
        }
        graph_.fuse(vt, vo);
        pbs(first, second);
        hadamard(target);
    }

    const ModeRegistry &modes() const {
        return modes_;
    }
    const ClusterGraph &graph() const {
        return graph_;
    }
    ClusterGraph &graph() {
        return graph_;
    }

    Circuit circuit() const {
        Circuit c;
        c.modes = modes_;
        for (const auto &g : sources_) {
            c.append(g);
        }
        for (const auto &g : ops_) {
            c.append(g);
        }
        return c;
    }

    Construction build() const {
        Construction out{circuit(), graph_, graph_.num_vertices() <= kDefaultMaxObservables};
        return out;
    }

   private:
    ModeRegistry modes_;
    std::vector<Gate> sources_;
    std::vector<Gate> ops_;
    ClusterGraph graph_;
};

inline Circuit bell_circuit(double r, double phi = 0) {
    ClusterBuilder b;
    b.add_bell(r, r, phi);
    return b.circuit();
}

/// Bell pair with different squeezing on the h and v pairs.
inline Circuit unequal_bell_circuit(double r_h, double r_v) {
    ClusterBuilder b;
    b.add_bell(r_h, r_v, 0);
    return b.circuit();
}

inline Construction cluster2_circuit(double r) {
    ClusterBuilder b;
    b.add_cluster2(r);
    b.graph().beta_equality = BetaEquality::Signed;
    return b.build();
}

/// Four-mode GHZ analogue: Bell pairs on (a, b) and (c, d) mixed on a PBS
/// acting on a and c.
inline Circuit ghz4_pbs_circuit(double r) {
    ClusterBuilder b;
    auto [a, bb] = b.add_bell(r, r, 0);
    auto [c, d] = b.add_bell(r, r, 0);
    (void)bb;
    (void)d;
    b.pbs(a, c);
    return b.circuit();
}

struct GhzConstruction {
    Circuit circuit;
    /// Spatial modes in ring order; mode i's h submode is squeezed with mode
    /// (i+1)'s v submode.
    std::vector<size_t> ring;
};

/// n = 2k spatial modes with prod_i S_{a(i)_h, a((i+1) mod n)_v}(r, 0).
inline GhzConstruction ghz_circuit(size_t pairs, double r) {
    if (pairs == 0) {
        throw std::invalid_argument("a GHZ analogue needs at least one Bell pair");
    }
    if (!(r >= 0)) {
        throw std::invalid_argument("squeezing must be >= 0");
    }
    GhzConstruction out;
    size_t n = 2 * pairs;
    for (size_t i = 0; i < n; i++) {
        out.ring.push_back(out.circuit.modes.add_polarized(default_mode_name(i)));
    }
    for (size_t i = 0; i < n; i++) {
        auto from = out.circuit.modes.polarized(out.ring[i]);
        auto to = out.circuit.modes.polarized(out.ring[(i + 1) % n]);
        out.circuit.append(gate::Squeeze{from.h, to.v, r, 0.0});
    }
    return out;
}

/// Two 2-mode clusters fused by one PBS operation on (a, c) with the Hadamard
/// on a: a star with center c and leaves a, b, d.
inline Construction star_circuit(double r) {
    ClusterBuilder b;
    auto [a, bb] = b.add_cluster2(r);
    auto [c, d] = b.add_cluster2(r);
    (void)bb;
    (void)d;
    b.pbs_op(a, c, a);
    b.graph().beta_equality = BetaEquality::Signed;
    return b.build();
}

namespace detail {

/// Appends a star and returns (center, leaf used for joining, free end leaf).
struct StarHandles {
    size_t center;
    size_t join_leaf;
    size_t end_leaf;
};

inline StarHandles add_star(ClusterBuilder &b, double r) {
    auto [a, bb] = b.add_cluster2(r);
    auto [c, d] = b.add_cluster2(r);
    (void)bb;
    b.pbs_op(a, c, a);
    return {c, a, d};
}

/// Builds a linear chain with `length` backbone vertices, returning the
/// backbone in order and, per backbone vertex, its attached leaves.
struct ChainHandles {
    std::vector<size_t> backbone;
};

inline ChainHandles add_chain(ClusterBuilder &b, size_t length, double r) {
    ChainHandles out;
    StarHandles first = add_star(b, r);
    out.backbone.push_back(first.center);
    size_t end_leaf = first.end_leaf;
    size_t remaining = length - 1;
    while (remaining > 0) {
        if (remaining >= 2) {
            // Join a whole star through one of its leaves; that leaf becomes
            // a backbone vertex between the two centers.
            StarHandles next = add_star(b, r);
            b.pbs_op(end_leaf, next.join_leaf, end_leaf);
            out.backbone.push_back(next.join_leaf);
            out.backbone.push_back(next.center);
            end_leaf = next.end_leaf;
            remaining -= 2;
        } else {
            auto [x, y] = b.add_cluster2(r);
            b.pbs_op(end_leaf, x, end_leaf);
            out.backbone.push_back(x);
            end_leaf = y;
            remaining -= 1;
        }
    }
    return out;
}

}  // namespace detail

/// Linear cluster with `length` backbone vertices and length + 2 leaves. A
/// length of 3 is two stars joined leaf to leaf.
inline Construction linear_chain(size_t length, double r) {
    if (length == 0) {
        throw std::invalid_argument("a linear chain needs at least one backbone vertex");
    }
    ClusterBuilder b;
    detail::add_chain(b, length, r);
    return b.build();
}

/// rows x cols planar cluster: `rows` linear chains, with vertically adjacent
/// backbone vertices joined by a PBS operation between a leaf of the upper
/// vertex and the lower vertex. Each such join moves a leaf rather than
/// consuming one, so the grid keeps rows * (cols + 2) leaves.
inline Construction grid(size_t rows, size_t cols, double r) {
    if (rows == 0 || cols == 0) {
        throw std::invalid_argument("grid dimensions must be >= 1");
    }
    ClusterBuilder b;
    std::vector<detail::ChainHandles> chains;
    for (size_t i = 0; i < rows; i++) {
        chains.push_back(detail::add_chain(b, cols, r));
    }
    for (size_t i = 0; i + 1 < rows; i++) {
        for (size_t j = 0; j < cols; j++) {
            const ClusterGraph &g = b.graph();
            size_t upper = g.vertex_of(chains[i].backbone[j]);
            size_t leaf = ClusterGraph::npos;
            for (auto u : g.neighbors(upper)) {
                if (g.neighbors(u).size() == 1) {
                    leaf = u;
                    break;
                }
            }
            if (leaf == ClusterGraph::npos) {
                throw std::logic_error("grid: backbone vertex without a free leaf");
            }
            size_t leaf_mode = g.spatial_mode(leaf);
            b.pbs_op(leaf_mode, chains[i + 1].backbone[j], leaf_mode);
        }
    }
    return b.build();
}

// ---------------------------------------------------------------------------
// Rebalancing, budgets and scaling.

inline void check_rebalance_args(double r1, double r2) {
    if (!(r2 >= 0) || !std::isfinite(r1) || !std::isfinite(r2)) {
        throw std::invalid_argument("squeezing values must be finite and >= 0");
    }
    if (r1 < r2) {
        throw std::invalid_argument("rebalancing needs r1 >= r2 (r1 is the stronger pair)");
    }
}

/// Transmissivity t on both modes of the stronger pair with
/// t sinh(r1) cosh(r1) = sinh(r2) cosh(r2).
inline double rebalance_loss(double r1, double r2) {
    check_rebalance_args(r1, r2);
    if (r1 == r2) {
        return 1.0;
    }
    return std::sinh(2 * r2) / std::sinh(2 * r1);
}

/// Gain g on both modes of the weaker pair with
/// sinh(r1) cosh(r1) = cosh^2(g) sinh(r2) cosh(r2).
inline double rebalance_gain(double r1, double r2) {
    check_rebalance_args(r1, r2);
    if (r1 == r2) {
        return 0.0;
    }
    if (r2 == 0) {
        throw std::invalid_argument("cannot amplify an unsqueezed pair into balance");
    }
    return std::acosh(std::sqrt(std::sinh(2 * r1) / std::sinh(2 * r2)));
}

/// Exact decibel cost of a factor-of-two efficiency hit.
inline const double kFactorTwoDb = 10 * std::log10(2.0);

inline double to_db(double ratio) {
    return 10 * std::log10(ratio);
}

struct BudgetReport {
    double r = 0;
    /// Smallest per-mode intensity transmissivity keeping prod_i Sbar_0
    /// bounded away from zero: sqrt(2) / sinh(2r).
    double gamma_max = 0;
    double gamma_max_db = 0;
    size_t pbs_ops_per_mode = 0;
    bool feedforward_penalty = false;
    /// Loss consumed by PBS operations (and feed-forward post-selection), as
    /// negative dB, with the exact 10 log10(2) per factor of two.
    double spent_db = 0;
    double residual_db = 0;
    /// Same accounting with gamma_max_db rounded to 0.1 dB and 3 dB per factor
    /// of two.
    double spent_db_nominal = 0;
    double residual_db_nominal = 0;
    double mean_photons_per_spatial_mode = 0;
    /// False when gamma_max > 1, i.e. sinh(2r) < sqrt(2).
    bool feasible = false;
};

inline BudgetReport loss_budget(double r, size_t pbs_ops_per_mode, bool feedforward_postselect) {
    if (!(r > 0) || !std::isfinite(r)) {
        throw std::invalid_argument("loss budget needs r > 0");
    }
    BudgetReport b;
    b.r = r;
    b.gamma_max = std::numbers::sqrt2 / std::sinh(2 * r);
    b.gamma_max_db = to_db(b.gamma_max);
    b.pbs_ops_per_mode = pbs_ops_per_mode;
    b.feedforward_penalty = feedforward_postselect;
    double halvings = static_cast<double>(pbs_ops_per_mode) + (feedforward_postselect ? 1.0 : 0.0);
    b.spent_db = -kFactorTwoDb * halvings;
    b.residual_db = b.gamma_max_db - b.spent_db;
    b.spent_db_nominal = -3.0 * halvings;
    b.residual_db_nominal = std::round(b.gamma_max_db * 10) / 10 - b.spent_db_nominal;
    b.mean_photons_per_spatial_mode = 2 * std::sinh(r) * std::sinh(r);
    b.feasible = b.gamma_max <= 1;
    return b;
}

/// |<prod_{i=1}^n Sbar_0>| for k = n/2 independent Bell pairs:
/// (sqrt(2) cosh r sinh r)^n.
inline double scaling_moment(size_t n, double r) {
    if (n == 0 || n % 2 != 0) {
        throw std::invalid_argument("the scaling law needs an even, nonzero number of spatial modes");
    }
    return std::pow(std::numbers::sqrt2 * std::cosh(r) * std::sinh(r), static_cast<double>(n));
}

/// Predicted co-fluctuation after a number of PBS operations.
inline double predicted_cofluctuation(size_t pbs_ops) {
    return std::ldexp(1.0, -static_cast<int>(pbs_ops));
}

/// Bell pairs r_h / r_v product, i.e. n = 2k modes for the scaling check.
inline Circuit bell_pairs_circuit(size_t pairs, double r) {
    ClusterBuilder b;
    for (size_t k = 0; k < pairs; k++) {
        b.add_bell(r, r, 0);
    }
    return b.circuit();
}

}  // namespace tms

#endif
