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

#include "tmsstats/planner.h"

#include <gtest/gtest.h>

#include "test_util.h"
#include "tmsstats/moments.h"
#include "tmsstats/stabilizer.h"

using namespace tms;
using namespace tms::testing;

namespace {

QuadraticObservable S(int i, PolarizedMode m) {
    return QuadraticObservable::stokes(i, m);
}

PolarizedMode vertex_mode(const Construction &c, size_t v) {
    return c.circuit.modes.polarized(c.graph.spatial_mode(v));
}

StabilizerReport report_of(const Construction &c) {
    return stabilizer_report(simulate(c.circuit), c.circuit.modes, c.graph);
}

void expect_physical_and_oracle_compatible(const Circuit &c) {
    EXPECT_TRUE(c.oracle_compatible());
    simulate(c, false, [](const GaussianState &s) { EXPECT_TRUE(s.is_physical()) << s.violated_invariant(); });
}

}  // namespace

TEST(bell_circuit, layout) {
    auto c = bell_circuit(0.5, 0.3);
    EXPECT_EQ(c.modes.num_spatial(), 2u);
    EXPECT_EQ(c.modes.num_modes(), 4u);
    ASSERT_EQ(c.gates.size(), 2u);
    EXPECT_EQ(std::get<gate::Squeeze>(c.gates[0]), (gate::Squeeze{0, 2, 0.5, 0.0}));
    EXPECT_EQ(std::get<gate::Squeeze>(c.gates[1]), (gate::Squeeze{1, 3, 0.5, 0.3}));
}

TEST(bell_circuit, zero_squeezing_is_vacuum) {
    EXPECT_EQ(simulate(bell_circuit(0)), GaussianState::vacuum(4));
}

TEST(bell_circuit, phase_pi_flips_s2) {
    auto a = simulate(bell_circuit(0.5, 0));
    auto b = simulate(bell_circuit(0.5, std::numbers::pi));
    double x = central_moment(a, {S(2, {0, 1}), S(2, {2, 3})});
    double y = central_moment(b, {S(2, {0, 1}), S(2, {2, 3})});
    EXPECT_GT(x, 0);
    EXPECT_NEAR(y, -x, 1e-12);
}

TEST(bell_circuit, rejects_negative_squeezing) {
    EXPECT_THROW(bell_circuit(-0.1), std::invalid_argument);
}

TEST(cluster2, stabilizers) {
    double r = 0.5;
    auto c = cluster2_circuit(r);
    EXPECT_EQ(c.graph.num_vertices(), 2u);
    EXPECT_TRUE(c.graph.has_edge(0, 1));
    auto s = simulate(c.circuit);
    auto a = vertex_mode(c, 0);
    auto b = vertex_mode(c, 1);
    double target = 2 * std::sqrt(delta_of(r));
    EXPECT_NEAR(central_moment(s, {S(2, a), S(1, b)}), target, 1e-10);
    EXPECT_NEAR(central_moment(s, {S(1, a), S(2, b)}), target, 1e-10);
    auto rep = report_of(c);
    EXPECT_TRUE(rep.pass);
    EXPECT_NEAR(rep.cofluctuation[0], 1, 1e-10);
}

TEST(cluster2, vacuum_fails) {
    auto rep = report_of(cluster2_circuit(0));
    EXPECT_FALSE(rep.pass);
    EXPECT_FALSE(rep.all_nonzero);
    for (double b : rep.beta) {
        EXPECT_EQ(b, 0);
    }
}

TEST(ghz_circuit, rejects_zero_pairs) {
    EXPECT_THROW(ghz_circuit(0, 0.5), std::invalid_argument);
}

TEST(ghz_circuit, ring_layout) {
    auto g = ghz_circuit(2, 0.5);
    EXPECT_EQ(g.ring.size(), 4u);
    EXPECT_EQ(g.circuit.gates.size(), 4u);
    EXPECT_TRUE(g.circuit.oracle_compatible());
    auto last = std::get<gate::Squeeze>(g.circuit.gates.back());
    EXPECT_EQ(last.i, g.circuit.modes.polarized(g.ring[3]).h);
    EXPECT_EQ(last.j, g.circuit.modes.polarized(g.ring[0]).v);
}

TEST(ghz_circuit, single_pair_has_bell_statistics) {
    double r = 0.7;
    auto g = ghz_circuit(1, r);
    auto s = simulate(g.circuit);
    auto a = g.circuit.modes.polarized(g.ring[0]);
    auto b = g.circuit.modes.polarized(g.ring[1]);
    double s2c2 = sh(r) * sh(r) * ch(r) * ch(r);
    EXPECT_NEAR(central_moment(s, {S(0, a), S(0, b)}), 2 * s2c2, 1e-10);
    // (|HV> + |VH>) statistics: Sbar_1 anti-correlated.
    EXPECT_NEAR(central_moment(s, {S(1, a), S(1, b)}), -2 * s2c2, 1e-10);
    EXPECT_NEAR(cofluctuation(s, {S(0, a), S(0, b)}), 1, 1e-10);
}

TEST(star, graph_and_stabilizers) {
    auto st = star_circuit(0.5);
    const auto &g = st.graph;
    EXPECT_EQ(g.num_vertices(), 4u);
    EXPECT_EQ(g.pbs_ops(), 1u);
    size_t center = g.vertex_of(2);
    EXPECT_EQ(g.neighbors(center).size(), 3u);
    EXPECT_EQ(g.leaves().size(), 3u);
    auto rep = report_of(st);
    EXPECT_TRUE(rep.pass);
    for (size_t v = 0; v < 4; v++) {
        EXPECT_GT(std::abs(rep.beta[v]), 1e-3);
        EXPECT_NEAR(rep.beta[v], rep.beta[0], 1e-9);
        EXPECT_NEAR(rep.cofluctuation[v], 0.5, 1e-9);
        EXPECT_LT(rep.residual[v], 1e-9);
    }
    // Regression value of the star stabilizer at r = 0.5.
    EXPECT_NEAR(rep.beta[0], 0.2384289074, 1e-10);
}

TEST(star, cofluctuation_halves) {
    double before = report_of(cluster2_circuit(0.4)).cofluctuation[0];
    auto after = report_of(star_circuit(0.4));
    for (double c : after.cofluctuation) {
        EXPECT_NEAR(c, before / 2, 1e-9);
    }
    EXPECT_NEAR(after.cofluctuation[0], predicted_cofluctuation(star_circuit(0.4).graph.pbs_ops()), 1e-9);
}

TEST(pbs_op, rejects_same_bell_pair) {
    ClusterBuilder b;
    auto [a, bb] = b.add_cluster2(0.5);
    EXPECT_THROW(b.pbs_op(a, bb, a), std::invalid_argument);
}

TEST(pbs_op, rejects_invalid_target) {
    ClusterBuilder b;
    auto [a, bb] = b.add_cluster2(0.5);
    auto [c, d] = b.add_cluster2(0.5);
    (void)bb;
    EXPECT_THROW(b.pbs_op(a, c, d), std::invalid_argument);
}

TEST(pbs_op, appends_pbs_then_hadamard) {
    ClusterBuilder b;
    auto [a, bb] = b.add_cluster2(0.5);
    auto [c, d] = b.add_cluster2(0.5);
    (void)bb;
    (void)d;
    b.pbs_op(a, c, a);
    auto circuit = b.circuit();
    ASSERT_GE(circuit.gates.size(), 2u);
    auto n = circuit.gates.size();
    EXPECT_EQ(std::get<gate::Pbs>(circuit.gates[n - 2]), (gate::Pbs{a, c}));
    auto pa = circuit.modes.polarized(a);
    EXPECT_EQ(std::get<gate::Hadamard>(circuit.gates[n - 1]), (gate::Hadamard{pa.h, pa.v}));
}

TEST(stabilizer_pattern, matches_template) {
    auto ch3 = linear_chain(3, 0.3);
    const auto &g = ch3.graph;
    for (size_t v = 0; v < g.num_vertices(); v++) {
        auto p = stabilizer_pattern(g, v);
        ASSERT_EQ(p.size(), g.num_vertices());
        for (size_t u = 0; u < g.num_vertices(); u++) {
            int expected = u == v ? 2 : (g.has_edge(u, v) ? 1 : 0);
            EXPECT_EQ(p[u], expected);
        }
    }
}

TEST(linear_chain, three_backbone_vertices) {
    auto c = linear_chain(3, 0.2);
    const auto &g = c.graph;
    EXPECT_EQ(g.num_vertices(), 8u);
    EXPECT_EQ(g.leaves().size(), 5u);
    EXPECT_EQ(g.edges().size(), 7u);
    auto rep = report_of(c);
    EXPECT_TRUE(rep.pass);
    for (double cf : rep.cofluctuation) {
        EXPECT_NEAR(cf, predicted_cofluctuation(g.pbs_ops()), 1e-9);
    }
}

TEST(linear_chain, rejects_zero_length) {
    EXPECT_THROW(linear_chain(0, 0.2), std::invalid_argument);
}

TEST(grid, leaf_counts) {
    EXPECT_EQ(grid(2, 3, 0.2).graph.leaves().size(), 10u);
    EXPECT_EQ(grid(1, 1, 0.2).graph.leaves().size(), 3u);
    for (size_t n = 1; n <= 3; n++) {
        for (size_t m = 1; m <= 4; m++) {
            EXPECT_EQ(grid(n, m, 0.2).graph.leaves().size(), n * (m + 2)) << n << "x" << m;
        }
    }
}

TEST(grid, wide_grids_are_flagged_unverifiable) {
    auto g = grid(2, 3, 0.2);
    EXPECT_FALSE(g.verifiable);
    EXPECT_GT(g.circuit.gates.size(), 0u);
    EXPECT_TRUE(grid(2, 1, 0.2).verifiable);
}

TEST(grid, rejects_empty) {
    EXPECT_THROW(grid(0, 2, 0.2), std::invalid_argument);
}

TEST(constructions, tree_shapes_pass_stabilizer_check) {
    for (double r : {0.2, 0.5}) {
        std::vector<Construction> all{cluster2_circuit(r), star_circuit(r), linear_chain(1, r), linear_chain(2, r),
                                      linear_chain(3, r), linear_chain(4, r), grid(1, 1, r), grid(2, 1, r)};
        for (const auto &c : all) {
            expect_physical_and_oracle_compatible(c.circuit);
            auto rep = report_of(c);
            EXPECT_TRUE(rep.all_nonzero);
            EXPECT_TRUE(rep.residuals_small);
            EXPECT_TRUE(rep.pass) << c.graph.num_vertices() << " vertices at r=" << r;
            for (double cf : rep.cofluctuation) {
                EXPECT_NEAR(cf, predicted_cofluctuation(c.graph.pbs_ops()), 1e-9);
            }
        }
    }
}

TEST(constructions, cyclic_grid_fails_stabilizer_check) {
    // Regression: with a cycle in the graph the leaf stabilizers pick up a
    // relative error of 1/16 and a nonzero residual, while the backbone stays
    // exact.
    auto c = grid(2, 2, 0.5);
    expect_physical_and_oracle_compatible(c.circuit);
    EXPECT_EQ(c.graph.num_vertices(), 12u);
    EXPECT_EQ(c.graph.pbs_ops(), 6u);
    auto rep = report_of(c);
    EXPECT_FALSE(rep.pass);
    EXPECT_TRUE(rep.all_nonzero);
    EXPECT_FALSE(rep.residuals_small);
    size_t exact = 0;
    for (size_t v = 0; v < c.graph.num_vertices(); v++) {
        if (std::abs(rep.cofluctuation[v] - predicted_cofluctuation(6)) < 1e-9) {
            exact++;
            EXPECT_LT(rep.residual[v], 1e-9);
        } else {
            EXPECT_EQ(c.graph.neighbors(v).size(), 1u) << "only leaves deviate";
        }
    }
    EXPECT_EQ(exact, 4u);
}

TEST(rebalance, values) {
    EXPECT_NEAR(rebalance_loss(1.0, 0.6), std::sinh(1.2) / std::sinh(2.0), 1e-15);
    EXPECT_NEAR(rebalance_loss(1.0, 0.6), 0.41619, 1e-5);
    double g = rebalance_gain(1.0, 0.6);
    EXPECT_NEAR(std::cosh(g) * std::cosh(g), std::sinh(2.0) / std::sinh(1.2), 1e-12);
    EXPECT_EQ(rebalance_loss(0.7, 0.7), 1.0);
    EXPECT_EQ(rebalance_gain(0.7, 0.7), 0.0);
    EXPECT_THROW(rebalance_loss(0.5, 0.6), std::invalid_argument);
    EXPECT_THROW(rebalance_gain(0.5, 0.6), std::invalid_argument);
    EXPECT_THROW(rebalance_gain(0.5, 0), std::invalid_argument);
}

TEST(rebalance, equalizes_tensor_and_harms_pearson) {
    double r1 = 1.0;
    double r2 = 0.6;
    PolarizedMode a{0, 1};
    PolarizedMode b{2, 3};
    auto base = simulate(unequal_bell_circuit(r1, r2));
    double t = rebalance_loss(r1, r2);
    double g = rebalance_gain(r1, r2);
    auto lossy = apply_loss(apply_loss(base, a.h, t), b.h, t);
    auto gained = apply_gain(apply_gain(base, a.v, g), b.v, g);
    for (const auto &s : {lossy, gained}) {
        auto rho = moment_tensor(s, {a, b}).rendered();
        double eta = rho(0, 0).real();
        double mu = rho(0, 3).real();
        double nu = rho(3, 3).real();
        EXPECT_NEAR(mu, eta, 1e-9 * eta);
        EXPECT_NEAR(nu, eta, 1e-9 * eta);
        EXPECT_LT(pearson(s, S(0, a), S(0, b)), 1 - 1e-3);
        EXPECT_TRUE(s.is_physical());
    }
    EXPECT_NEAR(pearson(base, S(0, a), S(0, b)), 1, 1e-10);
}

TEST(budget, paper_example) {
    auto b0 = loss_budget(2.3, 0, false);
    EXPECT_NEAR(b0.gamma_max, 0.02843, 1e-5);
    EXPECT_NEAR(b0.gamma_max_db, -15.46, 5e-3);
    EXPECT_NEAR(b0.mean_photons_per_spatial_mode, 49, 0.5);
    EXPECT_TRUE(b0.feasible);
    auto b3 = loss_budget(2.3, 3, false);
    EXPECT_NEAR(b3.residual_db, -6.42, 0.015);
    EXPECT_NEAR(b3.residual_db_nominal, -6.5, 1e-12);
    auto bf = loss_budget(2.3, 3, true);
    EXPECT_NEAR(bf.residual_db, -3.41, 0.015);
    EXPECT_NEAR(bf.residual_db_nominal, -3.5, 1e-12);
    EXPECT_NEAR(bf.residual_db, bf.gamma_max_db - bf.spent_db, 1e-12);
    EXPECT_NEAR(bf.spent_db, -4 * 10 * std::log10(2.0), 1e-12);
}

TEST(budget, infeasible_and_invalid) {
    EXPECT_FALSE(loss_budget(0.3, 0, false).feasible);
    EXPECT_THROW(loss_budget(0, 1, false), std::invalid_argument);
}

TEST(scaling_moment, values) {
    EXPECT_NEAR(scaling_moment(2, 1.0), 6.57706, 1e-5);
    EXPECT_NEAR(scaling_moment(4, 0.5), 0.476858, 1e-6);
    EXPECT_EQ(scaling_moment(4, 0.0), 0);
    EXPECT_THROW(scaling_moment(3, 1.0), std::invalid_argument);
    EXPECT_THROW(scaling_moment(0, 1.0), std::invalid_argument);
}
