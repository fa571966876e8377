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

#ifndef TMSSTATS_SAMPLER_H
#define TMSSTATS_SAMPLER_H

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "tmsstats/gaussian_state.h"
#include "tmsstats/moments.h"
#include "tmsstats/rng.h"

namespace tms {

/// Heterodyne-style samples: row k holds the complex amplitudes of shot k.
struct SampleBatch {
    size_t shots = 0;
    size_t num_modes = 0;
    std::vector<cplx> alpha;
    uint64_t seed = 0;
    uint64_t fingerprint = 0;

    cplx at(size_t shot, size_t mode) const {
        return alpha[shot * num_modes + mode];
    }
};

/// FNV-1a over the bytes of N and A.
inline uint64_t state_fingerprint(const GaussianState &s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&](const CMatrix &m) {
        for (Eigen::Index c = 0; c < m.cols(); c++) {
            for (Eigen::Index r = 0; r < m.rows(); r++) {
                double parts[2] = {m(r, c).real(), m(r, c).imag()};
                unsigned char bytes[sizeof parts];
                std::memcpy(bytes, parts, sizeof parts);
                for (unsigned char b : bytes) {
                    h = (h ^ b) * 0x100000001b3ULL;
                }
            }
        }
    };
    mix(s.N());
    mix(s.A());
    return h;
}

/// Draws from the Husimi Q function: a zero-mean complex Gaussian with
/// E[alpha_i conj(alpha_j)] = <a_i a_j^dag> and E[alpha_i alpha_j] = <a_i a_j>.
inline SampleBatch sample_state(const GaussianState &s, size_t shots, uint64_t seed) {
    s.require_physical();
    auto m = static_cast<Eigen::Index>(s.num_modes());
    CMatrix p = s.N().transpose() + CMatrix::Identity(m, m);
    const CMatrix &q = s.A();
    RMatrix cov(2 * m, 2 * m);
    cov.topLeftCorner(m, m) = (p.real() + q.real()) / 2;
    cov.bottomRightCorner(m, m) = (p.real() - q.real()) / 2;
    RMatrix xy = (q.imag() - p.imag()) / 2;
    cov.topRightCorner(m, m) = xy;
    cov.bottomLeftCorner(m, m) = xy.transpose();
    cov = (cov + cov.transpose()) / 2;
    Eigen::SelfAdjointEigenSolver<RMatrix> eig(cov);
    Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    RMatrix factor = eig.eigenvectors() * root.asDiagonal();

    SampleBatch b;
    b.shots = shots;
    b.num_modes = s.num_modes();
    b.seed = seed;
    b.fingerprint = state_fingerprint(s);
    b.alpha.resize(shots * b.num_modes);
    Eigen::VectorXd z(2 * m);
    for (size_t k = 0; k < shots; k++) {
        for (Eigen::Index c = 0; c < m; c++) {
            auto [g0, g1] = counter_normal_pair(seed, k, static_cast<uint64_t>(c));
            z(2 * c) = g0;
            z(2 * c + 1) = g1;
        }
        Eigen::VectorXd v = factor * z;
        for (Eigen::Index i = 0; i < m; i++) {
            b.alpha[k * b.num_modes + static_cast<size_t>(i)] = cplx(v(i), v(m + i));
        }
    }
    return b;
}

// ---------------------------------------------------------------------------
// Normal -> anti-normal ordering.

/// Phase-space polynomial sum c * prod alpha_{ann} * prod conj(alpha_{cre}).
struct PhasePolynomial {
    struct Monomial {
        std::vector<uint8_t> ann;
        std::vector<uint8_t> cre;
        auto operator<=>(const Monomial &) const = default;
    };
    std::map<Monomial, cplx> terms;

    void add(Monomial m, cplx c) {
        std::sort(m.ann.begin(), m.ann.end());
        std::sort(m.cre.begin(), m.cre.end());
        terms[m] += c;
    }

    cplx evaluate(const cplx *alpha) const {
        cplx total = 0;
        for (const auto &[mono, c] : terms) {
            cplx v = c;
            for (auto a : mono.ann) {
                v *= alpha[a];
            }
            for (auto a : mono.cre) {
                v *= std::conj(alpha[a]);
            }
            total += v;
        }
        return total;
    }
};

namespace detail {

struct Ladder {
    uint8_t mode;
    bool dagger;
};

/// Rewrites an operator word into anti-normal order using
/// a^dag_m a_n = a_n a^dag_m - delta_mn, accumulating into out.
inline void antinormal_expand(std::vector<Ladder> word, cplx coef, PhasePolynomial &out) {
    for (size_t p = 0; p + 1 < word.size(); p++) {
        if (word[p].dagger && !word[p + 1].dagger) {
            if (word[p].mode == word[p + 1].mode) {
                std::vector<Ladder> shorter;
                shorter.reserve(word.size() - 2);
                shorter.insert(shorter.end(), word.begin(), word.begin() + static_cast<std::ptrdiff_t>(p));
                shorter.insert(shorter.end(), word.begin() + static_cast<std::ptrdiff_t>(p) + 2, word.end());
                antinormal_expand(std::move(shorter), -coef, out);
            }
            std::swap(word[p], word[p + 1]);
            antinormal_expand(std::move(word), coef, out);
            return;
        }
    }
    PhasePolynomial::Monomial m;
    for (const auto &l : word) {
        (l.dagger ? m.cre : m.ann).push_back(l.mode);
    }
    out.add(std::move(m), coef);
}

}  // namespace detail

/// Anti-normally ordered phase-space form of Q_1 Q_2 ... Q_k: its Husimi
/// average equals the quantum expectation of the product.
inline PhasePolynomial antinormal_form(const std::vector<QuadraticObservable> &obs) {
    PhasePolynomial out;
    std::vector<detail::Ladder> word;
    std::function<void(size_t, cplx)> expand = [&](size_t j, cplx coef) {
        if (j == obs.size()) {
            detail::antinormal_expand(word, coef, out);
            return;
        }
        const auto &sup = obs[j].support();
        const CMatrix &k = obs[j].local_matrix();
        for (size_t p = 0; p < sup.size(); p++) {
            for (size_t q = 0; q < sup.size(); q++) {
                cplx c = k(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
                if (c == cplx(0)) {
                    continue;
                }
                word.push_back({static_cast<uint8_t>(sup[p]), true});
                word.push_back({static_cast<uint8_t>(sup[q]), false});
                expand(j + 1, coef * c);
                word.pop_back();
                word.pop_back();
            }
        }
    };
    expand(0, 1);
    std::erase_if(out.terms, [](const auto &kv) { return std::abs(kv.second) < 1e-15; });
    return out;
}

// ---------------------------------------------------------------------------
// Estimation.

inline constexpr size_t kMaxSampledObservables = 4;
inline constexpr size_t kMaxJackknifeBatches = 1000;

struct EstimateReport {
    double estimate = 0;
    double stderr_ = 0;
    size_t shots = 0;
    double z = 0;
};

namespace detail {

/// Plug-in central moment from raw subset means, indexed by bitmask.
inline double plugin_central(const std::vector<double> &raw, size_t q, bool centered) {
    size_t full = (size_t{1} << q) - 1;
    if (!centered) {
        return raw[full];
    }
    double total = 0;
    for (size_t subset = 0; subset <= full; subset++) {
        double factor = 1;
        for (size_t j = 0; j < q; j++) {
            if (subset & (size_t{1} << j)) {
                factor *= -raw[size_t{1} << j];
            }
        }
        total += factor * raw[full & ~subset];
    }
    return total;
}

}  // namespace detail

/// Estimates the raw or central moment of the query from a Husimi sample.
/// Standard error by delete-a-group jackknife.
inline EstimateReport estimate_query(const SampleBatch &batch, const MomentQuery &query) {
    const auto &obs = query.observables;
    if (query.regularized) {
        throw std::invalid_argument("unsupported query: co-fluctuations are not estimated from samples");
    }
    if (obs.size() > kMaxSampledObservables) {
        throw std::invalid_argument(
            "unsupported degree: sampled queries are limited to " + std::to_string(kMaxSampledObservables) +
            " quadratic factors (degree 8)");
    }
    validate_observables(obs, batch.num_modes, kDefaultMaxObservables);
    if (batch.shots == 0) {
        throw std::invalid_argument("cannot estimate from an empty sample");
    }
    size_t q = obs.size();
    size_t subsets = size_t{1} << q;
    std::vector<PhasePolynomial> polys(subsets);
    for (size_t subset = 0; subset < subsets; subset++) {
        std::vector<QuadraticObservable> part;
        for (size_t j = 0; j < q; j++) {
            if (subset & (size_t{1} << j)) {
                part.push_back(obs[j]);
            }
        }
        polys[subset] = antinormal_form(part);
    }

    size_t groups = std::min(batch.shots, kMaxJackknifeBatches);
    std::vector<std::vector<double>> group_sums(groups, std::vector<double>(subsets, 0));
    std::vector<size_t> group_size(groups, 0);
    for (size_t k = 0; k < batch.shots; k++) {
        size_t g = k * groups / batch.shots;
        group_size[g]++;
        const cplx *alpha = &batch.alpha[k * batch.num_modes];
        for (size_t subset = 0; subset < subsets; subset++) {
            group_sums[g][subset] += polys[subset].evaluate(alpha).real();
        }
    }
    std::vector<double> total(subsets, 0);
    for (size_t g = 0; g < groups; g++) {
        for (size_t subset = 0; subset < subsets; subset++) {
            total[subset] += group_sums[g][subset];
        }
    }
    auto n = static_cast<double>(batch.shots);
    std::vector<double> raw(subsets);
    for (size_t subset = 0; subset < subsets; subset++) {
        raw[subset] = total[subset] / n;
    }

    EstimateReport rep;
    rep.shots = batch.shots;
    rep.estimate = detail::plugin_central(raw, q, query.centered);
    if (groups < 2) {
        rep.stderr_ = std::numeric_limits<double>::infinity();
        rep.z = 0;
        return rep;
    }
    std::vector<double> loo(groups);
    double mean = 0;
    for (size_t g = 0; g < groups; g++) {
        double m = n - static_cast<double>(group_size[g]);
        for (size_t subset = 0; subset < subsets; subset++) {
            raw[subset] = (total[subset] - group_sums[g][subset]) / m;
        }
        loo[g] = detail::plugin_central(raw, q, query.centered);
        mean += loo[g];
    }
    mean /= static_cast<double>(groups);
    double ss = 0;
    for (double v : loo) {
        ss += (v - mean) * (v - mean);
    }
    auto b = static_cast<double>(groups);
    rep.stderr_ = std::sqrt((b - 1) / b * ss);
    rep.z = rep.stderr_ > 0 ? rep.estimate / rep.stderr_ : 0;
    return rep;
}

/// Shots needed so the expected z-score of the single-shot product estimator
/// reaches z: n = ceil(z^2 V / beta^2) with V = <(prod Qbar_j)^2> - beta^2
/// computed exactly. shots is empty when beta vanishes.
struct ResolveEstimate {
    std::optional<uint64_t> shots;
    double moment = 0;
    double per_shot_variance = 0;
};

inline ResolveEstimate shots_to_resolve(
    const GaussianState &s, const std::vector<QuadraticObservable> &obs, double z, const WickOptions &opt = {}) {
    if (!(z > 0) || !std::isfinite(z)) {
        throw std::invalid_argument("confidence z must be positive and finite");
    }
    ResolveEstimate out;
    out.moment = central_moment(s, obs, opt);
    std::vector<QuadraticObservable> doubled;
    doubled.reserve(2 * obs.size());
    for (const auto &q : obs) {
        doubled.push_back(q);
        doubled.push_back(q);
    }
    double second = central_moment(s, doubled, opt);
    out.per_shot_variance = std::max(0.0, second - out.moment * out.moment);
    double beta = std::abs(out.moment);
    if (beta == 0 || beta <= 1e-10 * std::sqrt(second)) {
        return out;
    }
    double n = std::ceil(z * z * out.per_shot_variance / (beta * beta));
    out.shots = static_cast<uint64_t>(std::max(1.0, n));
    return out;
}

}  // namespace tms

#endif
