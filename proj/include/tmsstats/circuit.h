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

#ifndef TMSSTATS_CIRCUIT_H
#define TMSSTATS_CIRCUIT_H

#include <algorithm>
#include <cctype>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tmsstats/gaussian_state.h"

namespace tms {

/// Names the modes of a circuit. A spatial mode is either plain (one bosonic
/// mode) or polarized (an h submode followed by a v submode).
class ModeRegistry {
   public:
    struct Spatial {
        std::string name;
        bool polarized = false;
        size_t first = 0;
        bool operator==(const Spatial &) const = default;
    };

    size_t add(const std::string &name, bool polarized) {
        if (find(name)) {
            throw std::invalid_argument("duplicate mode name '" + name + "'");
        }
        if (!valid_name(name)) {
            throw std::invalid_argument("invalid mode name '" + name + "'");
        }
        spatial_.push_back({name, polarized, num_modes_});
        num_modes_ += polarized ? 2 : 1;
        return spatial_.size() - 1;
    }
    size_t add_polarized(const std::string &name) {
        return add(name, true);
    }
    size_t add_plain(const std::string &name) {
        return add(name, false);
    }

    static bool valid_name(const std::string &name) {
        if (name.empty() || !(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_')) {
            return false;
        }
        return std::all_of(name.begin(), name.end(), [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
        });
    }

    std::optional<size_t> find(const std::string &name) const {
        for (size_t k = 0; k < spatial_.size(); k++) {
            if (spatial_[k].name == name) {
                return k;
            }
        }
        return std::nullopt;
    }

    size_t num_modes() const {
        return num_modes_;
    }
    size_t num_spatial() const {
        return spatial_.size();
    }
    const Spatial &spatial(size_t k) const {
        return spatial_.at(k);
    }
    const std::vector<Spatial> &all_spatial() const {
        return spatial_;
    }

    PolarizedMode polarized(size_t k) const {
        const auto &s = spatial_.at(k);
        if (!s.polarized) {
            throw std::invalid_argument("mode '" + s.name + "' is not polarized");
        }
        return {s.first, s.first + 1};
    }

    /// "a.h", "a.v" or "a" for a bosonic mode index.
    std::string mode_name(size_t mode) const {
        for (const auto &s : spatial_) {
            if (s.polarized && (mode == s.first || mode == s.first + 1)) {
                return s.name + (mode == s.first ? ".h" : ".v");
            }
            if (!s.polarized && mode == s.first) {
                return s.name;
            }
        }
        throw std::invalid_argument("unknown mode index " + std::to_string(mode));
    }

    /// Inverse of mode_name.
    std::optional<size_t> resolve(const std::string &ref) const {
        auto dot = ref.find('.');
        std::string base = dot == std::string::npos ? ref : ref.substr(0, dot);
        auto k = find(base);
        if (!k) {
            return std::nullopt;
        }
        const auto &s = spatial_[*k];
        if (dot == std::string::npos) {
            return s.polarized ? std::nullopt : std::optional<size_t>(s.first);
        }
        std::string sub = ref.substr(dot + 1);
        if (!s.polarized) {
            return std::nullopt;
        }
        if (sub == "h") {
            return s.first;
        }
        if (sub == "v") {
            return s.first + 1;
        }
        return std::nullopt;
    }

    bool operator==(const ModeRegistry &) const = default;

   private:
    std::vector<Spatial> spatial_;
    size_t num_modes_ = 0;
};

/// Spreadsheet-style default names: a..z, aa, ab, ...
inline std::string default_mode_name(size_t k) {
    std::string s;
    k += 1;
    while (k > 0) {
        k -= 1;
        s.insert(s.begin(), static_cast<char>('a' + k % 26));
        k /= 26;
    }
    return s;
}

namespace gate {
struct Squeeze {
    size_t i, j;
    double r, phi;
    bool operator==(const Squeeze &) const = default;
};
struct Hadamard {
    size_t i, j;
    bool operator==(const Hadamard &) const = default;
};
struct BeamSplitter {
    size_t i, j;
    double theta, phi;
    bool operator==(const BeamSplitter &) const = default;
};
/// Operands are spatial-mode indices of the registry (both polarized).
struct Pbs {
    size_t a, b;
    bool operator==(const Pbs &) const = default;
};
struct Loss {
    size_t i;
    double t;
    bool operator==(const Loss &) const = default;
};
struct Gain {
    size_t i;
    double g;
    bool operator==(const Gain &) const = default;
};
struct Swap {
    size_t i, j;
    bool operator==(const Swap &) const = default;
};
}  // namespace gate

using Gate = std::variant<gate::Squeeze, gate::Hadamard, gate::BeamSplitter, gate::Pbs, gate::Loss, gate::Gain, gate::Swap>;

/// Ordered gate list over a mode registry, applied to the vacuum.
struct Circuit {
    ModeRegistry modes;
    std::vector<Gate> gates;

    /// Validates indices and parameter ranges, then appends.
    void append(const Gate &g) {
        auto check = [&](size_t m) {
            if (m >= modes.num_modes()) {
                throw std::invalid_argument("gate refers to mode index " + std::to_string(m) + " outside the circuit");
            }
        };
        auto distinct = [&](size_t i, size_t j) {
            check(i);
            check(j);
            if (i == j) {
                throw std::invalid_argument("gate modes must differ");
            }
        };
        std::visit(
            [&](const auto &x) {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, gate::Squeeze>) {
                    distinct(x.i, x.j);
                    if (!(x.r >= 0) || !std::isfinite(x.r) || !std::isfinite(x.phi)) {
                        throw std::invalid_argument("squeeze: r must be finite and >= 0");
                    }
                } else if constexpr (std::is_same_v<T, gate::Pbs>) {
                    if (x.a == x.b) {
                        throw std::invalid_argument("pbs: spatial modes must differ");
                    }
                    modes.polarized(x.a);
                    modes.polarized(x.b);
                } else if constexpr (std::is_same_v<T, gate::Loss>) {
                    check(x.i);
                    if (!(x.t >= 0 && x.t <= 1)) {
                        throw std::invalid_argument("loss: transmissivity must lie in [0, 1]");
                    }
                } else if constexpr (std::is_same_v<T, gate::Gain>) {
                    check(x.i);
                    if (!(x.g >= 0) || !std::isfinite(x.g)) {
                        throw std::invalid_argument("gain: g must be finite and >= 0");
                    }
                } else if constexpr (std::is_same_v<T, gate::BeamSplitter>) {
                    distinct(x.i, x.j);
                    if (!std::isfinite(x.theta) || !std::isfinite(x.phi)) {
                        throw std::invalid_argument("bs: parameters must be finite");
                    }
                } else {
                    distinct(x.i, x.j);
                }
            },
            g);
        gates.push_back(g);
    }

    /// True when every squeezer acts on two modes no earlier gate touched, the
    /// precondition of the Fock oracle.
    bool oracle_compatible() const {
        std::vector<bool> touched(modes.num_modes(), false);
        for (const auto &g : gates) {
            bool ok = std::visit(
                [&](const auto &x) -> bool {
                    using T = std::decay_t<decltype(x)>;
                    if constexpr (std::is_same_v<T, gate::Squeeze>) {
                        bool fresh = !touched[x.i] && !touched[x.j];
                        touched[x.i] = touched[x.j] = true;
                        return fresh;
                    } else if constexpr (std::is_same_v<T, gate::Pbs>) {
                        auto p = modes.polarized(x.a);
                        auto q = modes.polarized(x.b);
                        touched[p.h] = touched[p.v] = touched[q.h] = touched[q.v] = true;
                        return true;
                    } else if constexpr (std::is_same_v<T, gate::Loss> || std::is_same_v<T, gate::Gain>) {
                        touched[x.i] = true;
                        return true;
                    } else {
                        touched[x.i] = touched[x.j] = true;
                        return true;
                    }
                },
                g);
            if (!ok) {
                return false;
            }
        }
        return true;
    }

    bool operator==(const Circuit &) const = default;
};

inline GaussianState apply_gate(const GaussianState &s, const ModeRegistry &modes, const Gate &g, bool pbs_reflection_phase = false) {
    return std::visit(
        [&](const auto &x) -> GaussianState {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, gate::Squeeze>) {
                return apply_squeezer(s, x.i, x.j, x.r, x.phi);
            } else if constexpr (std::is_same_v<T, gate::Hadamard>) {
                return apply_hadamard(s, x.i, x.j);
            } else if constexpr (std::is_same_v<T, gate::BeamSplitter>) {
                return apply_beamsplitter(s, x.i, x.j, x.theta, x.phi);
            } else if constexpr (std::is_same_v<T, gate::Pbs>) {
                return apply_pbs(s, modes.polarized(x.a), modes.polarized(x.b), pbs_reflection_phase);
            } else if constexpr (std::is_same_v<T, gate::Loss>) {
                return apply_loss(s, x.i, x.t);
            } else if constexpr (std::is_same_v<T, gate::Gain>) {
                return apply_gain(s, x.i, x.g);
            } else {
                return apply_swap(s, x.i, x.j);
            }
        },
        g);
}

/// Runs the circuit on the vacuum. observe, when given, sees every
/// intermediate state (including the initial vacuum).
inline GaussianState simulate(
    const Circuit &c,
    bool pbs_reflection_phase = false,
    const std::function<void(const GaussianState &)> &observe = {}) {
    GaussianState s = GaussianState::vacuum(std::max<size_t>(1, c.modes.num_modes()));
    if (observe) {
        observe(s);
    }
    for (const auto &g : c.gates) {
        s = apply_gate(s, c.modes, g, pbs_reflection_phase);
        if (observe) {
            observe(s);
        }
    }
    return s;
}

}  // namespace tms

#endif
