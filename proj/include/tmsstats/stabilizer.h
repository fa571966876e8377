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

#ifndef TMSSTATS_STABILIZER_H
#define TMSSTATS_STABILIZER_H

#include <cmath>
#include <vector>

#include "tmsstats/circuit.h"
#include "tmsstats/cluster_graph.h"
#include "tmsstats/moments.h"

namespace tms {

/// Stokes pattern of the stabilizer moment for `vertex`: 2 at the vertex, 1 on
/// its neighbors, 0 on every other vertex.
inline std::vector<int> stabilizer_pattern(const ClusterGraph &g, size_t vertex) {
    std::vector<int> pattern(g.num_vertices(), 0);
    for (auto u : g.neighbors(vertex)) {
        pattern[u] = 1;
    }
    pattern[vertex] = 2;
    return pattern;
}

inline std::vector<QuadraticObservable> stokes_query(
    const ModeRegistry &modes, const ClusterGraph &g, const std::vector<int> &pattern) {
    std::vector<QuadraticObservable> obs;
    obs.reserve(pattern.size());
    for (size_t v = 0; v < pattern.size(); v++) {
        obs.push_back(QuadraticObservable::stokes(pattern[v], modes.polarized(g.spatial_mode(v))));
    }
    return obs;
}

struct StabilizerOptions {
    /// |beta| must exceed this for a vertex to count as stabilized.
    double threshold = 1e-8;
    double residual_tolerance = 1e-9;
    /// Relative tolerance for equal-beta predictions.
    double equality_tolerance = 1e-9;
    WickOptions wick;
};

struct StabilizerReport {
    /// Signed stabilizer moment per vertex.
    std::vector<double> beta;
    /// Per vertex: largest |moment| among the patterns obtained by replacing
    /// the vertex's Sbar_2 with Sbar_0, Sbar_1 or Sbar_3. These vanish for a
    /// state with the graph's stabilizer pattern.
    std::vector<double> residual;
    /// Per vertex: beta divided by the product of the factors' standard deviations.
    std::vector<double> cofluctuation;
    BetaEquality equality = BetaEquality::None;
    bool all_nonzero = false;
    bool residuals_small = false;
    bool equal_as_predicted = false;
    bool pass = false;
};

inline StabilizerReport stabilizer_report(
    const GaussianState &s, const ModeRegistry &modes, const ClusterGraph &g, const StabilizerOptions &opt = {}) {
    for (size_t v = 0; v < g.num_vertices(); v++) {
        auto p = modes.polarized(g.spatial_mode(v));
        if (p.v >= s.num_modes()) {
            throw std::invalid_argument("graph vertex is not a mode of the state");
        }
    }
    if (g.num_vertices() > opt.wick.max_observables) {
        throw CapacityError("stabilizer query width exceeds the moment engine cap");
    }
    StabilizerReport rep;
    rep.equality = g.beta_equality;
    std::vector<double> var(g.num_vertices());
    for (size_t v = 0; v < g.num_vertices(); v++) {
        auto pattern = stabilizer_pattern(g, v);
        auto obs = stokes_query(modes, g, pattern);
        rep.beta.push_back(central_moment(s, obs, opt.wick));
        double worst = 0;
        for (int alt : {0, 1, 3}) {
            auto variant = pattern;
            variant[v] = alt;
            worst = std::max(worst, std::abs(central_moment(s, stokes_query(modes, g, variant), opt.wick)));
        }
        rep.residual.push_back(worst);
        double denom = 1;
        for (const auto &q : obs) {
            denom *= std::sqrt(std::max(0.0, variance(s, q, opt.wick)));
        }
        rep.cofluctuation.push_back(denom > 0 ? rep.beta.back() / denom : 0.0);
    }
    rep.all_nonzero = std::all_of(rep.beta.begin(), rep.beta.end(), [&](double b) { return std::abs(b) > opt.threshold; });
    rep.residuals_small =
        std::all_of(rep.residual.begin(), rep.residual.end(), [&](double r) { return r < opt.residual_tolerance; });
    rep.equal_as_predicted = true;
    if (rep.equality != BetaEquality::None && !rep.beta.empty()) {
        double scale = 0;
        for (double b : rep.beta) {
            scale = std::max(scale, std::abs(b));
        }
        for (double b : rep.beta) {
            double d = rep.equality == BetaEquality::Signed ? b - rep.beta[0] : std::abs(b) - std::abs(rep.beta[0]);
            if (std::abs(d) > opt.equality_tolerance * std::max(1.0, scale)) {
                rep.equal_as_predicted = false;
            }
        }
    }
    rep.pass = rep.all_nonzero && rep.residuals_small && rep.equal_as_predicted;
    return rep;
}

}  // namespace tms

#endif
