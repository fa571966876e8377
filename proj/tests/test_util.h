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

#ifndef TMSSTATS_TEST_UTIL_H
#define TMSSTATS_TEST_UTIL_H

#include <algorithm>
#include <numbers>
#include <random>

#include "tmsstats/circuit.h"
#include "tmsstats/gaussian_state.h"
#include "tmsstats/observable.h"

namespace tms::testing {

inline double sh(double r) {
    return std::sinh(r);
}
inline double ch(double r) {
    return std::cosh(r);
}
inline double delta_of(double r) {
    return std::pow(sh(r) * ch(r), 4);
}

inline Circuit tmsv_circuit(double r) {
    Circuit c;
    c.modes.add_plain("a");
    c.modes.add_plain("b");
    c.append(gate::Squeeze{0, 1, r, 0});
    return c;
}

/// Random vacuum-seeded circuit on `modes` plain modes: squeezers on fresh
/// disjoint pairs first, then passive gates and at most one channel.
inline Circuit random_circuit(std::mt19937_64 &rng, size_t modes, size_t max_squeezers, size_t max_passive, double max_r, bool channel) {
    std::uniform_real_distribution<double> unit(0, 1);
    Circuit c;
    for (size_t k = 0; k < modes; k++) {
        c.modes.add_plain(default_mode_name(k));
    }
    std::vector<size_t> order(modes);
    for (size_t k = 0; k < modes; k++) {
        order[k] = k;
    }
    std::shuffle(order.begin(), order.end(), rng);
    size_t squeezers = 1 + rng() % std::min(max_squeezers, modes / 2);
    for (size_t k = 0; k < squeezers; k++) {
        c.append(gate::Squeeze{order[2 * k], order[2 * k + 1], max_r * (0.2 + 0.8 * unit(rng)), 2 * std::numbers::pi * unit(rng)});
    }
    auto pair = [&]() {
        size_t i = rng() % modes;
        size_t j = rng() % (modes - 1);
        if (j >= i) {
            j++;
        }
        return std::pair{i, j};
    };
    size_t passive = rng() % (max_passive + 1);
    size_t channel_at = channel ? rng() % (passive + 1) : passive + 1;
    for (size_t k = 0; k <= passive; k++) {
        if (k == channel_at) {
            size_t m = rng() % modes;
            if (rng() % 2) {
                c.append(gate::Loss{m, unit(rng)});
            } else {
                c.append(gate::Gain{m, 0.3 * unit(rng)});
            }
        }
        if (k == passive) {
            break;
        }
        auto [i, j] = pair();
        switch (rng() % 3) {
            case 0:
                c.append(gate::Hadamard{i, j});
                break;
            case 1:
                c.append(gate::BeamSplitter{i, j, std::numbers::pi * unit(rng), 2 * std::numbers::pi * unit(rng)});
                break;
            default:
                c.append(gate::Swap{i, j});
                break;
        }
    }
    return c;
}

/// Random Hermitian quadratic observable on the given modes.
inline QuadraticObservable random_observable(std::mt19937_64 &rng, std::vector<size_t> support) {
    std::normal_distribution<double> g;
    auto d = static_cast<Eigen::Index>(support.size());
    CMatrix k(d, d);
    for (Eigen::Index p = 0; p < d; p++) {
        k(p, p) = g(rng);
        for (Eigen::Index q = p + 1; q < d; q++) {
            k(p, q) = cplx(g(rng), g(rng));
            k(q, p) = std::conj(k(p, q));
        }
    }
    return QuadraticObservable(std::move(support), k, ObservableKind::Custom);
}

}  // namespace tms::testing

#endif
