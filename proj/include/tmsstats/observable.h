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

#ifndef TMSSTATS_OBSERVABLE_H
#define TMSSTATS_OBSERVABLE_H

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "tmsstats/gaussian_state.h"

namespace tms {

enum class ObservableKind { Number, S0, S1, S2, S3, Custom };

inline const char *kind_name(ObservableKind k) {
    switch (k) {
        case ObservableKind::Number:
            return "N";
        case ObservableKind::S0:
            return "S0";
        case ObservableKind::S1:
            return "S1";
        case ObservableKind::S2:
            return "S2";
        case ObservableKind::S3:
            return "S3";
        default:
            return "custom";
    }
}

/// Q = sum_{a,b} K(a,b) c_a^dag c_b where c_a ranges over the support modes.
///
/// The coefficient matrix is stored restricted to the support so that the
/// pairing kernel works with d x d blocks (d <= 2 for number and Stokes
/// observables).
class QuadraticObservable {
   public:
    static constexpr size_t kMaxSupport = 4;

    QuadraticObservable(std::vector<size_t> support, CMatrix local_k, ObservableKind kind = ObservableKind::Custom)
        : support_(std::move(support)), k_(std::move(local_k)), kind_(kind) {
        auto d = static_cast<Eigen::Index>(support_.size());
        if (support_.empty() || support_.size() > kMaxSupport) {
            throw std::invalid_argument("observable support must hold 1 to 4 modes");
        }
        if (k_.rows() != d || k_.cols() != d) {
            throw std::invalid_argument("observable coefficient matrix must match its support");
        }
        for (size_t p = 0; p < support_.size(); p++) {
            for (size_t q = p + 1; q < support_.size(); q++) {
                if (support_[p] == support_[q]) {
                    throw std::invalid_argument("observable support modes must be distinct");
                }
            }
        }
        if ((k_ - k_.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
            throw std::invalid_argument("observable coefficient matrix must be Hermitian");
        }
    }

    /// n_i = a_i^dag a_i.
    static QuadraticObservable number(size_t mode) {
        CMatrix k(1, 1);
        k(0, 0) = 1;
        return QuadraticObservable({mode}, k, ObservableKind::Number);
    }

    /// Stokes operators on a polarized spatial mode:
    ///   S0 = h^dag h + v^dag v      S1 = h^dag h - v^dag v
    ///   S2 = h^dag v + v^dag h      S3 = i (v^dag h - h^dag v)
    static QuadraticObservable stokes(int index, PolarizedMode m) {
        CMatrix k = CMatrix::Zero(2, 2);
        ObservableKind kind;
        switch (index) {
            case 0:
                k(0, 0) = 1;
                k(1, 1) = 1;
                kind = ObservableKind::S0;
                break;
            case 1:
                k(0, 0) = 1;
                k(1, 1) = -1;
                kind = ObservableKind::S1;
                break;
            case 2:
                k(0, 1) = 1;
                k(1, 0) = 1;
                kind = ObservableKind::S2;
                break;
            case 3:
                // K(row = created mode, col = annihilated mode).
                k(1, 0) = cplx(0, 1);
                k(0, 1) = cplx(0, -1);
                kind = ObservableKind::S3;
                break;
            default:
                throw std::invalid_argument("Stokes index must be 0, 1, 2 or 3");
        }
        return QuadraticObservable({m.h, m.v}, k, kind);
    }

    /// Builds an observable from a full M x M Hermitian coefficient matrix,
    /// keeping only the modes it touches.
    static QuadraticObservable from_full(const CMatrix &full_k) {
        std::vector<size_t> support;
        for (Eigen::Index i = 0; i < full_k.rows(); i++) {
            if (full_k.row(i).cwiseAbs().maxCoeff() > 0 || full_k.col(i).cwiseAbs().maxCoeff() > 0) {
                support.push_back(static_cast<size_t>(i));
            }
        }
        if (support.empty()) {
            throw std::invalid_argument("observable coefficient matrix is zero");
        }
        auto d = static_cast<Eigen::Index>(support.size());
        CMatrix local(d, d);
        for (Eigen::Index p = 0; p < d; p++) {
            for (Eigen::Index q = 0; q < d; q++) {
                local(p, q) = full_k(static_cast<Eigen::Index>(support[p]), static_cast<Eigen::Index>(support[q]));
            }
        }
        return QuadraticObservable(std::move(support), std::move(local));
    }

    const std::vector<size_t> &support() const {
        return support_;
    }
    const CMatrix &local_matrix() const {
        return k_;
    }
    ObservableKind kind() const {
        return kind_;
    }

    CMatrix full_matrix(size_t num_modes) const {
        auto m = static_cast<Eigen::Index>(num_modes);
        CMatrix full = CMatrix::Zero(m, m);
        for (size_t p = 0; p < support_.size(); p++) {
            for (size_t q = 0; q < support_.size(); q++) {
                full(static_cast<Eigen::Index>(support_[p]), static_cast<Eigen::Index>(support_[q])) =
                    k_(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
            }
        }
        return full;
    }

    size_t max_mode() const {
        return *std::max_element(support_.begin(), support_.end());
    }

    bool overlaps(const QuadraticObservable &other) const {
        for (auto m : support_) {
            if (std::find(other.support_.begin(), other.support_.end(), m) != other.support_.end()) {
                return true;
            }
        }
        return false;
    }

    bool operator==(const QuadraticObservable &other) const {
        return support_ == other.support_ && k_ == other.k_;
    }

   private:
    std::vector<size_t> support_;
    CMatrix k_;
    ObservableKind kind_;
};

/// Default cap on the number of observables in one query; the pairing count
/// grows as (2q-1)!!.
inline constexpr size_t kDefaultMaxObservables = 12;

/// An ordered product of quadratic observables to be evaluated on a state.
/// centered: each factor is replaced by Q - <Q>.
/// regularized: each centered factor is further divided by sqrt(<Qbar Qbar>).
struct MomentQuery {
    std::vector<QuadraticObservable> observables;
    bool centered = true;
    bool regularized = false;
};

/// All factors must commute: any two observables either act on disjoint modes
/// or are identical.
inline void validate_observables(
    const std::vector<QuadraticObservable> &obs, size_t num_modes, size_t max_observables = kDefaultMaxObservables) {
    if (obs.size() > max_observables) {
        throw CapacityError(
            "query has " + std::to_string(obs.size()) + " observables; the cap is " + std::to_string(max_observables));
    }
    for (size_t p = 0; p < obs.size(); p++) {
        if (obs[p].max_mode() >= num_modes) {
            throw std::invalid_argument("observable refers to a mode outside the state");
        }
        for (size_t q = p + 1; q < obs.size(); q++) {
            if (obs[p].overlaps(obs[q]) && !(obs[p] == obs[q])) {
                throw std::invalid_argument(
                    "query observables must act on disjoint modes or be identical (non-commuting factors)");
            }
        }
    }
}

}  // namespace tms

#endif
