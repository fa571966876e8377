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

#ifndef TMSSTATS_FOCK_H
#define TMSSTATS_FOCK_H

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

#include "tmsstats/circuit.h"
#include "tmsstats/errors.h"
#include "tmsstats/observable.h"
#include "tmsstats/rng.h"

namespace tms {

/// Occupation numbers packed 8 bits per mode.
using FockKey = unsigned __int128;

struct FockKeyHash {
    size_t operator()(FockKey k) const {
        return static_cast<size_t>(splitmix64(static_cast<uint64_t>(k) ^ splitmix64(static_cast<uint64_t>(k >> 64))));
    }
};

inline constexpr size_t kMaxFockModes = 16;
inline constexpr int kMaxOccupation = 255;

struct FockOptions {
    size_t max_entries = 20'000'000;
    /// Amplitudes below this magnitude are dropped (counted as truncation).
    double prune = 1e-12;
};

/// Sparse truncated Fock-space vector over system modes followed by ancillas.
class FockVector {
   public:
    using Map = std::unordered_map<FockKey, cplx, FockKeyHash>;

    FockVector(size_t system_modes, int cutoff) : system_modes_(system_modes), num_modes_(system_modes), cutoff_(cutoff) {
        if (system_modes > kMaxFockModes) {
            throw CapacityError("fock oracle supports at most 16 modes");
        }
        amps_[0] = 1;
    }

    static int occupation(FockKey k, size_t mode) {
        return static_cast<int>((k >> (8 * mode)) & 0xff);
    }
    static FockKey with_occupation(FockKey k, size_t mode, int n) {
        FockKey mask = FockKey{0xff} << (8 * mode);
        return (k & ~mask) | (static_cast<FockKey>(n) << (8 * mode));
    }
    static FockKey make_key(const std::vector<int> &occ) {
        FockKey k = 0;
        for (size_t m = 0; m < occ.size(); m++) {
            k = with_occupation(k, m, occ[m]);
        }
        return k;
    }

    size_t num_system_modes() const {
        return system_modes_;
    }
    size_t num_modes() const {
        return num_modes_;
    }
    int cutoff() const {
        return cutoff_;
    }
    double truncation_error() const {
        return truncation_error_;
    }
    size_t size() const {
        return amps_.size();
    }
    const Map &amplitudes() const {
        return amps_;
    }
    Map &amplitudes() {
        return amps_;
    }

    cplx amplitude(const std::vector<int> &occ) const {
        auto it = amps_.find(make_key(occ));
        return it == amps_.end() ? cplx(0) : it->second;
    }

    double norm2() const {
        double total = 0;
        for (const auto &[k, a] : amps_) {
            total += std::norm(a);
        }
        return total;
    }

    size_t add_ancilla() {
        if (num_modes_ >= kMaxFockModes) {
            throw CapacityError("fock oracle supports at most 16 modes including ancillas");
        }
        return num_modes_++;
    }

    void set_truncation_error(double e) {
        truncation_error_ = e;
    }

   private:
    size_t system_modes_;
    size_t num_modes_;
    int cutoff_;
    double truncation_error_ = 0;
    Map amps_;
};

namespace detail {

inline double log_factorial(int n) {
    return std::lgamma(static_cast<double>(n) + 1);
}

inline void check_capacity(const FockVector::Map &m, const FockOptions &opt) {
    if (m.size() > opt.max_entries) {
        throw CapacityError("fock oracle exceeded its entry budget (" + std::to_string(opt.max_entries) + " amplitudes)");
    }
}

inline void accumulate(FockVector::Map &out, FockKey k, cplx a, const FockOptions &opt) {
    if (std::abs(a) < opt.prune) {
        return;
    }
    out[k] += a;
}

/// Two-mode passive unitary whose Heisenberg action is a_i -> u00 a_i + u01 a_j,
/// a_j -> u10 a_i + u11 a_j. Photon number is conserved, so no truncation.
inline void fock_passive2(FockVector &f, size_t i, size_t j, const Eigen::Matrix2cd &u, const FockOptions &opt) {
    // U a_i^dag U^dag = u00 a_i^dag + u10 a_j^dag, U a_j^dag U^dag = u01 a_i^dag + u11 a_j^dag.
    std::map<std::pair<int, int>, std::vector<cplx>> table;
    auto coefficients = [&](int n0, int n1) -> const std::vector<cplx> & {
        auto [it, fresh] = table.try_emplace({n0, n1});
        if (!fresh) {
            return it->second;
        }
        int total = n0 + n1;
        std::vector<cplx> c(static_cast<size_t>(total) + 1, 0);
        double base = -0.5 * (log_factorial(n0) + log_factorial(n1));
        for (int k = 0; k <= n0; k++) {
            cplx fk = std::pow(u(0, 0), k) * std::pow(u(1, 0), n0 - k);
            double lk = log_factorial(n0) - log_factorial(k) - log_factorial(n0 - k);
            for (int l = 0; l <= n1; l++) {
                cplx fl = std::pow(u(0, 1), l) * std::pow(u(1, 1), n1 - l);
                double ll = log_factorial(n1) - log_factorial(l) - log_factorial(n1 - l);
                int p = k + l;
                double mag = std::exp(lk + ll + base + 0.5 * (log_factorial(p) + log_factorial(total - p)));
                c[static_cast<size_t>(p)] += fk * fl * mag;
            }
        }
        it->second = std::move(c);
        return it->second;
    };

    FockVector::Map out;
    out.reserve(f.amplitudes().size() * 2);
    for (const auto &[key, amp] : f.amplitudes()) {
        int n0 = FockVector::occupation(key, i);
        int n1 = FockVector::occupation(key, j);
        if (n0 == 0 && n1 == 0) {
            accumulate(out, key, amp, opt);
            continue;
        }
        const auto &c = coefficients(n0, n1);
        int total = n0 + n1;
        for (int p = 0; p <= total; p++) {
            if (p > kMaxOccupation || total - p > kMaxOccupation) {
                continue;
            }
            cplx v = c[static_cast<size_t>(p)];
            if (v == cplx(0)) {
                continue;
            }
            FockKey k2 = FockVector::with_occupation(FockVector::with_occupation(key, i, p), j, total - p);
            accumulate(out, k2, amp * v, opt);
        }
        check_capacity(out, opt);
    }
    f.amplitudes() = std::move(out);
}

/// Two-mode squeezer on modes in vacuum: sum_n (e^{i phi} tanh r)^n / cosh r |n, n>.
inline void fock_squeeze_vacuum(FockVector &f, size_t i, size_t j, double r, double phi, const FockOptions &opt) {
    cplx lambda = std::polar(std::tanh(r), phi);
    double inv_cosh = 1 / std::cosh(r);
    FockVector::Map out;
    out.reserve(f.amplitudes().size() * static_cast<size_t>(f.cutoff() + 1));
    for (const auto &[key, amp] : f.amplitudes()) {
        cplx w = amp * inv_cosh;
        for (int n = 0; n <= f.cutoff(); n++) {
            FockKey k2 = FockVector::with_occupation(FockVector::with_occupation(key, i, n), j, n);
            accumulate(out, k2, w, opt);
            w *= lambda;
        }
        check_capacity(out, opt);
    }
    f.amplitudes() = std::move(out);
}

/// Two-mode squeezer between occupied mode i and fresh vacuum ancilla:
/// |n, 0> -> sum_p sqrt(C(n+p, p)) tanh^p g / cosh^{n+1} g |n+p, p>.
inline void fock_gain(FockVector &f, size_t i, size_t ancilla, double g, const FockOptions &opt) {
    double t = std::tanh(g);
    double lc = std::log(std::cosh(g));
    FockVector::Map out;
    out.reserve(f.amplitudes().size() * static_cast<size_t>(f.cutoff() + 1));
    for (const auto &[key, amp] : f.amplitudes()) {
        int n = FockVector::occupation(key, i);
        for (int p = 0; p <= f.cutoff() && n + p <= kMaxOccupation; p++) {
            double lbin = log_factorial(n + p) - log_factorial(n) - log_factorial(p);
            double mag = std::exp(0.5 * lbin - (n + 1) * lc) * (p == 0 ? 1.0 : std::pow(t, p));
            FockKey k2 = FockVector::with_occupation(FockVector::with_occupation(key, i, n + p), ancilla, p);
            accumulate(out, k2, amp * mag, opt);
        }
        check_capacity(out, opt);
    }
    f.amplitudes() = std::move(out);
}

}  // namespace detail

/// Runs the circuit on the vacuum in a truncated Fock space. Squeezers must act
/// on modes still in vacuum; loss and gain are purified with fresh ancillas.
/// The returned vector is normalized, with truncation_error() = 1 - norm^2 of
/// the unnormalized truncated state.
inline FockVector oracle_state(
    const Circuit &c, int cutoff, bool pbs_reflection_phase = false, const FockOptions &opt = {}) {
    if (cutoff < 4 || cutoff > kMaxOccupation) {
        throw std::invalid_argument("fock oracle cutoff must lie in [4, 255]");
    }
    size_t system = std::max<size_t>(1, c.modes.num_modes());
    size_t channels = 0;
    for (const auto &g : c.gates) {
        if (std::holds_alternative<gate::Loss>(g) || std::holds_alternative<gate::Gain>(g)) {
            channels++;
        }
    }
    if (system + channels > kMaxFockModes) {
        throw CapacityError("fock oracle supports at most 16 modes including ancillas");
    }
    FockVector f(system, cutoff);
    std::vector<bool> touched(system, false);
    for (const auto &g : c.gates) {
        std::visit(
            [&](const auto &x) {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, gate::Squeeze>) {
                    if (touched[x.i] || touched[x.j]) {
                        throw UnsupportedCircuit("fock oracle: squeezer on modes that are no longer in vacuum");
                    }
                    touched[x.i] = touched[x.j] = true;
                    detail::fock_squeeze_vacuum(f, x.i, x.j, x.r, x.phi, opt);
                } else if constexpr (std::is_same_v<T, gate::Hadamard>) {
                    double h = std::numbers::sqrt2 / 2;
                    Eigen::Matrix2cd u;
                    u << h, h, h, -h;
                    touched[x.i] = touched[x.j] = true;
                    detail::fock_passive2(f, x.i, x.j, u, opt);
                } else if constexpr (std::is_same_v<T, gate::BeamSplitter>) {
                    Eigen::Matrix2cd u;
                    u << std::cos(x.theta), -std::polar(std::sin(x.theta), -x.phi), std::polar(std::sin(x.theta), x.phi),
                        std::cos(x.theta);
                    touched[x.i] = touched[x.j] = true;
                    detail::fock_passive2(f, x.i, x.j, u, opt);
                } else if constexpr (std::is_same_v<T, gate::Swap>) {
                    Eigen::Matrix2cd u;
                    u << 0, 1, 1, 0;
                    touched[x.i] = touched[x.j] = true;
                    detail::fock_passive2(f, x.i, x.j, u, opt);
                } else if constexpr (std::is_same_v<T, gate::Pbs>) {
                    auto p = c.modes.polarized(x.a);
                    auto q = c.modes.polarized(x.b);
                    cplx refl = pbs_reflection_phase ? cplx(0, 1) : cplx(1, 0);
                    Eigen::Matrix2cd u;
                    u << 0, refl, refl, 0;
                    touched[p.h] = touched[p.v] = touched[q.h] = touched[q.v] = true;
                    detail::fock_passive2(f, p.v, q.v, u, opt);
                } else if constexpr (std::is_same_v<T, gate::Loss>) {
                    size_t anc = f.add_ancilla();
                    double st = std::sqrt(x.t);
                    double sr = std::sqrt(1 - x.t);
                    Eigen::Matrix2cd u;
                    u << st, sr, -sr, st;
                    touched[x.i] = true;
                    detail::fock_passive2(f, x.i, anc, u, opt);
                } else {
                    size_t anc = f.add_ancilla();
                    touched[x.i] = true;
                    detail::fock_gain(f, x.i, anc, x.g, opt);
                }
            },
            g);
    }
    double n2 = f.norm2();
    if (!(n2 > 0) || !std::isfinite(n2)) {
        throw NumericError("fock oracle: state norm is not finite and positive");
    }
    double scale = 1 / std::sqrt(n2);
    for (auto &[k, a] : f.amplitudes()) {
        a *= scale;
    }
    f.set_truncation_error(std::max(0.0, 1 - n2));
    return f;
}

namespace detail {

/// Calls f(key', c) for every term of Q |key> = sum c |key'>.
template <typename F>
inline void for_each_term(const QuadraticObservable &q, FockKey key, F &&f) {
    const auto &sup = q.support();
    const CMatrix &k = q.local_matrix();
    for (size_t p = 0; p < sup.size(); p++) {
        for (size_t r = 0; r < sup.size(); r++) {
            cplx coef = k(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(r));
            if (coef == cplx(0)) {
                continue;
            }
            int nr = FockVector::occupation(key, sup[r]);
            if (nr == 0) {
                continue;
            }
            FockKey k1 = FockVector::with_occupation(key, sup[r], nr - 1);
            int np = FockVector::occupation(k1, sup[p]);
            if (np + 1 > kMaxOccupation) {
                throw CapacityError("fock oracle: occupation overflow while applying an observable");
            }
            f(FockVector::with_occupation(k1, sup[p], np + 1), coef * std::sqrt(static_cast<double>(nr) * (np + 1)));
        }
    }
}

inline bool is_diagonal(const QuadraticObservable &q) {
    const CMatrix &k = q.local_matrix();
    return k.isApprox(CMatrix(k.diagonal().asDiagonal()), 0.0);
}

/// <key| Q |key> for an observable with diagonal local matrix.
inline double diagonal_value(const QuadraticObservable &q, FockKey key) {
    double v = 0;
    const auto &sup = q.support();
    for (size_t p = 0; p < sup.size(); p++) {
        v += q.local_matrix()(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)).real() *
             FockVector::occupation(key, sup[p]);
    }
    return v;
}

using Entries = std::vector<std::pair<FockKey, cplx>>;

/// (Q - shift) |phi>, materialized.
inline Entries apply_quadratic(const Entries &in, const QuadraticObservable &q, double shift) {
    FockVector::Map out;
    out.reserve(in.size() * 2);
    for (const auto &[key, amp] : in) {
        for_each_term(q, key, [&](FockKey k2, cplx c) { out[k2] += amp * c; });
        if (shift != 0) {
            out[key] -= shift * amp;
        }
    }
    return Entries(out.begin(), out.end());
}

/// <bra| (Q - shift) |phi> without materializing Q |phi>.
inline cplx sandwich(const FockVector::Map &bra, const Entries &ket, const QuadraticObservable &q, double shift) {
    auto lookup = [&](FockKey k) {
        auto it = bra.find(k);
        return it == bra.end() ? cplx(0) : std::conj(it->second);
    };
    cplx total = 0;
    for (const auto &[key, amp] : ket) {
        for_each_term(q, key, [&](FockKey k2, cplx c) { total += lookup(k2) * amp * c; });
        if (shift != 0) {
            total -= shift * lookup(key) * amp;
        }
    }
    return total;
}

inline double fock_product(const FockVector &f, const std::vector<QuadraticObservable> &obs, bool centered) {
    for (const auto &q : obs) {
        if (q.max_mode() >= f.num_system_modes()) {
            throw std::invalid_argument("oracle query touches an ancilla or unknown mode");
        }
    }
    const auto &psi = f.amplitudes();
    std::vector<char> diagonal(obs.size());
    for (size_t j = 0; j < obs.size(); j++) {
        diagonal[j] = is_diagonal(obs[j]);
    }
    std::vector<double> means(obs.size(), 0);
    if (centered) {
        for (size_t j = 0; j < obs.size(); j++) {
            if (diagonal[j]) {
                double m = 0;
                for (const auto &[key, amp] : psi) {
                    m += std::norm(amp) * diagonal_value(obs[j], key);
                }
                means[j] = m;
            } else {
                Entries ket(psi.begin(), psi.end());
                means[j] = sandwich(psi, ket, obs[j], 0).real();
            }
        }
    }
    std::vector<size_t> offdiag;
    for (size_t j = 0; j < obs.size(); j++) {
        if (!diagonal[j]) {
            offdiag.push_back(j);
        }
    }
    auto diagonal_factor = [&](FockKey key) {
        double w = 1;
        for (size_t j = 0; j < obs.size(); j++) {
            if (diagonal[j]) {
                w *= diagonal_value(obs[j], key) - means[j];
            }
        }
        return w;
    };
    if (offdiag.empty()) {
        double total = 0;
        for (const auto &[key, amp] : psi) {
            total += std::norm(amp) * diagonal_factor(key);
        }
        return total;
    }
    // Diagonal factors commute with everything in the query, so they are
    // applied first as a rescaling.
    Entries ket;
    ket.reserve(psi.size());
    for (const auto &[key, amp] : psi) {
        double w = diagonal_factor(key);
        if (w != 0) {
            ket.emplace_back(key, amp * w);
        }
    }
    for (size_t p = 0; p + 1 < offdiag.size(); p++) {
        ket = apply_quadratic(ket, obs[offdiag[p]], means[offdiag[p]]);
    }
    return sandwich(psi, ket, obs[offdiag.back()], means[offdiag.back()]).real();
}

}  // namespace detail

/// Direct expectation of the query on the (normalized) truncated state.
inline double oracle_moment(const FockVector &f, const MomentQuery &query) {
    validate_observables(query.observables, f.num_system_modes(), kDefaultMaxObservables);
    if (query.regularized) {
        double denom = 1;
        for (const auto &q : query.observables) {
            double v = detail::fock_product(f, {q, q}, true);
            if (v <= 1e-14) {
                throw NumericError("undefined co-fluctuation: an observable has zero variance");
            }
            denom *= std::sqrt(v);
        }
        return detail::fock_product(f, query.observables, true) / denom;
    }
    return detail::fock_product(f, query.observables, query.centered);
}

/// Photon-number distribution over the system modes, sorted by key.
inline std::vector<std::pair<FockKey, double>> oracle_distribution(const FockVector &f) {
    FockKey mask = 0;
    for (size_t m = 0; m < f.num_system_modes(); m++) {
        mask |= FockKey{0xff} << (8 * m);
    }
    std::unordered_map<FockKey, double, FockKeyHash> probs;
    for (const auto &[key, amp] : f.amplitudes()) {
        probs[key & mask] += std::norm(amp);
    }
    std::vector<std::pair<FockKey, double>> out(probs.begin(), probs.end());
    std::sort(out.begin(), out.end(), [](const auto &x, const auto &y) { return x.first < y.first; });
    return out;
}

/// Born-rule photon-number samples over the system modes. Shot k uses the
/// counter-based stream (seed, k), so results do not depend on batching.
inline std::vector<std::vector<int>> oracle_sample(const FockVector &f, size_t shots, uint64_t seed) {
    std::vector<std::vector<int>> out;
    if (shots == 0) {
        return out;
    }
    auto dist = oracle_distribution(f);
    std::vector<double> cumulative(dist.size());
    double acc = 0;
    for (size_t k = 0; k < dist.size(); k++) {
        acc += dist[k].second;
        cumulative[k] = acc;
    }
    out.reserve(shots);
    for (size_t s = 0; s < shots; s++) {
        double u = counter_uniform(seed, s, 0) * acc;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        size_t idx = std::min(static_cast<size_t>(it - cumulative.begin()), dist.size() - 1);
        std::vector<int> occ(f.num_system_modes());
        for (size_t m = 0; m < occ.size(); m++) {
            occ[m] = FockVector::occupation(dist[idx].first, m);
        }
        out.push_back(std::move(occ));
    }
    return out;
}

}  // namespace tms

#endif
