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

#ifndef TMSSTATS_MOMENTS_H
#define TMSSTATS_MOMENTS_H

#include <cmath>
#include <span>
#include <sstream>
#include <vector>

#include "tmsstats/gaussian_state.h"
#include "tmsstats/observable.h"
#include "tmsstats/wick.h"

namespace tms {

/// Moments of Hermitian observables are real; larger imaginary parts signal a
/// malformed query or state.
inline constexpr double kImagResidueTolerance = 1e-10;

/// Variances at or below this are treated as zero when normalizing.
inline constexpr double kZeroVariance = 1e-14;

namespace detail {
inline double real_part_checked(cplx v, const char *what) {
    if (std::abs(v.imag()) > kImagResidueTolerance * std::max(1.0, std::abs(v.real()))) {
        std::stringstream msg;
        msg << what << " has imaginary residue " << v.imag() << " (moments of Hermitian observables are real)";
        throw NumericError(msg.str());
    }
    return v.real();
}
}  // namespace detail

/// <Q> = sum K_mn N_mn.
inline double expectation(const GaussianState &s, const QuadraticObservable &q) {
    validate_observables({q}, s.num_modes());
    const auto &sup = q.support();
    const CMatrix &k = q.local_matrix();
    cplx v = 0;
    for (size_t a = 0; a < sup.size(); a++) {
        for (size_t b = 0; b < sup.size(); b++) {
            v += k(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) *
                 s.N()(static_cast<Eigen::Index>(sup[a]), static_cast<Eigen::Index>(sup[b]));
        }
    }
    return detail::real_part_checked(v, "expectation");
}

inline double raw_moment(const GaussianState &s, const std::vector<QuadraticObservable> &obs, const WickOptions &opt = {}) {
    return detail::real_part_checked(wick_moment(s, obs, false, opt), "raw moment");
}

/// <prod_j (Q_j - <Q_j>)> from the pairing sum without self-contractions.
inline double central_moment(
    const GaussianState &s, const std::vector<QuadraticObservable> &obs, const WickOptions &opt = {}) {
    return detail::real_part_checked(wick_moment(s, obs, true, opt), "central moment");
}

/// Independent route to the central moment:
///   sum over subsets S of (-1)^|S| prod_{j in S} <Q_j> * <prod_{j not in S} Q_j>.
/// Costs 2^q raw moments; kept for cross-checking central_moment.
inline double central_moment_by_inclusion_exclusion(
    const GaussianState &s, const std::vector<QuadraticObservable> &obs, const WickOptions &opt = {}) {
    validate_observables(obs, s.num_modes(), opt.max_observables);
    size_t q = obs.size();
    std::vector<double> means(q);
    for (size_t j = 0; j < q; j++) {
        means[j] = expectation(s, obs[j]);
    }
    CompensatedSum total;
    for (uint32_t subset = 0; subset < (uint32_t{1} << q); subset++) {
        double factor = 1;
        std::vector<QuadraticObservable> rest;
        for (size_t j = 0; j < q; j++) {
            if (subset & (uint32_t{1} << j)) {
                factor *= -means[j];
            } else {
                rest.push_back(obs[j]);
            }
        }
        if (factor == 0) {
            continue;
        }
        total.add(factor * wick_moment(s, rest, false, opt));
    }
    return detail::real_part_checked(total.value(), "central moment");
}

inline double variance(const GaussianState &s, const QuadraticObservable &q, const WickOptions &opt = {}) {
    return central_moment(s, {q, q}, opt);
}

inline double covariance(
    const GaussianState &s, const QuadraticObservable &q1, const QuadraticObservable &q2, const WickOptions &opt = {}) {
    return central_moment(s, {q1, q2}, opt);
}

inline double pearson(
    const GaussianState &s, const QuadraticObservable &q1, const QuadraticObservable &q2, const WickOptions &opt = {}) {
    double v1 = variance(s, q1, opt);
    double v2 = variance(s, q2, opt);
    if (v1 <= kZeroVariance || v2 <= kZeroVariance) {
        throw NumericError("undefined correlation: an observable has zero variance");
    }
    return covariance(s, q1, q2, opt) / std::sqrt(v1 * v2);
}

/// Central moment of the variance-regularized operators Qbar / sqrt(<Qbar Qbar>),
/// using the supplied per-factor variances.
inline double cofluctuation_with_variances(
    const GaussianState &s,
    const std::vector<QuadraticObservable> &obs,
    std::span<const double> variances,
    const WickOptions &opt = {}) {
    if (variances.size() != obs.size()) {
        throw std::invalid_argument("one variance per observable is required");
    }
    double denom = 1;
    for (double v : variances) {
        if (v <= kZeroVariance) {
            throw NumericError("undefined co-fluctuation: an observable has zero variance");
        }
        denom *= std::sqrt(v);
    }
    return central_moment(s, obs, opt) / denom;
}

inline double cofluctuation(const GaussianState &s, const std::vector<QuadraticObservable> &obs, const WickOptions &opt = {}) {
    std::vector<double> vars;
    vars.reserve(obs.size());
    for (const auto &q : obs) {
        vars.push_back(variance(s, q, opt));
    }
    return cofluctuation_with_variances(s, obs, vars, opt);
}

/// Dispatches on the query flags: raw, central, or regularized (co-fluctuation).
inline double evaluate(const GaussianState &s, const MomentQuery &query, const WickOptions &opt = {}) {
    if (query.regularized) {
        return cofluctuation(s, query.observables, opt);
    }
    if (query.centered) {
        return central_moment(s, query.observables, opt);
    }
    return raw_moment(s, query.observables, opt);
}

/// The 4^n joint central Stokes moments <Sbar_{i1} ... Sbar_{in}> over n
/// polarized spatial modes, one Stokes index per mode. The first mode is the
/// most significant base-4 digit of the flat index.
///
/// Read as sum_I c_I sigma_I with sigma_0 = 1, sigma_1 = Z, sigma_2 = X,
/// sigma_3 = Y this resembles a density matrix but is not one (it is not
/// positive in general).
struct MomentTensor {
    size_t num_modes = 0;
    std::vector<double> entries;
    double max_imag_residue = 0;

    static size_t flat_index(std::span<const int> stokes) {
        size_t k = 0;
        for (int i : stokes) {
            k = 4 * k + static_cast<size_t>(i);
        }
        return k;
    }
    static std::vector<int> digits(size_t flat, size_t n) {
        std::vector<int> d(n);
        for (size_t p = n; p-- > 0;) {
            d[p] = static_cast<int>(flat % 4);
            flat /= 4;
        }
        return d;
    }

    double at(std::span<const int> stokes) const {
        return entries.at(flat_index(stokes));
    }

    /// Trace of the rendered matrix, which equals <Sbar_0 ... Sbar_0>.
    double trace() const {
        return entries.at(0);
    }

    /// 2^-n sum_I c_I sigma_{i1} x ... x sigma_{in}; divide by trace() for the
    /// unit-trace form.
    CMatrix rendered() const {
        static const cplx pauli[4][2][2] = {
            {{1, 0}, {0, 1}},
            {{1, 0}, {0, -1}},
            {{0, 1}, {1, 0}},
            {{0, cplx(0, -1)}, {cplx(0, 1), 0}},
        };
        auto dim = static_cast<Eigen::Index>(size_t{1} << num_modes);
        CMatrix out = CMatrix::Zero(dim, dim);
        double scale = std::ldexp(1.0, -static_cast<int>(num_modes));
        for (size_t flat = 0; flat < entries.size(); flat++) {
            if (entries[flat] == 0) {
                continue;
            }
            auto idx = digits(flat, num_modes);
            for (Eigen::Index r = 0; r < dim; r++) {
                for (Eigen::Index c = 0; c < dim; c++) {
                    cplx v = entries[flat] * scale;
                    for (size_t p = 0; p < num_modes && v != cplx(0); p++) {
                        auto bit = static_cast<int>(num_modes - 1 - p);
                        v *= pauli[idx[p]][(r >> bit) & 1][(c >> bit) & 1];
                    }
                    out(r, c) += v;
                }
            }
        }
        return out;
    }
};

inline constexpr size_t kMaxTensorModes = 6;

inline MomentTensor moment_tensor(
    const GaussianState &s, const std::vector<PolarizedMode> &modes, const WickOptions &opt = {}) {
    if (modes.empty() || modes.size() > kMaxTensorModes) {
        throw CapacityError("moment tensor supports 1 to 6 spatial modes");
    }
    MomentTensor t;
    t.num_modes = modes.size();
    size_t total = size_t{1} << (2 * modes.size());
    t.entries.resize(total);
    for (size_t flat = 0; flat < total; flat++) {
        auto idx = MomentTensor::digits(flat, modes.size());
        std::vector<QuadraticObservable> obs;
        for (size_t p = 0; p < modes.size(); p++) {
            obs.push_back(QuadraticObservable::stokes(idx[p], modes[p]));
        }
        cplx v = wick_moment(s, obs, true, opt);
        t.max_imag_residue = std::max(t.max_imag_residue, std::abs(v.imag()));
        t.entries[flat] = v.real();
    }
    if (t.max_imag_residue > kImagResidueTolerance * std::max(1.0, std::abs(t.entries[0]))) {
        throw NumericError("moment tensor has non-negligible imaginary residue");
    }
    return t;
}

}  // namespace tms

#endif
