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

#ifndef TMSSTATS_GAUSSIAN_STATE_H
#define TMSSTATS_GAUSSIAN_STATE_H

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

#include "tmsstats/errors.h"

namespace tms {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;

/// Default absolute tolerance for invariant checks on exact second moments.
inline constexpr double kExactTolerance = 1e-10;

/// Zero-mean Gaussian state of M bosonic modes, stored through its second
/// moments N(i,j) = <a_i^dag a_j> and A(i,j) = <a_i a_j>.
///
/// Instances are immutable values. Every gate below returns a new state.
class GaussianState {
   public:
    /// Builds a state from raw moment matrices. Shapes are validated; physical
    /// validity is not (see validate()).
    GaussianState(CMatrix n, CMatrix a) : n_(std::move(n)), a_(std::move(a)) {
        if (n_.rows() == 0 || n_.rows() != n_.cols() || a_.rows() != n_.rows() || a_.cols() != n_.cols()) {
            throw std::invalid_argument("GaussianState needs square N and A of equal nonzero size");
        }
    }

    static GaussianState vacuum(size_t num_modes) {
        if (num_modes == 0) {
            throw std::invalid_argument("a Gaussian state needs at least one mode");
        }
        auto m = static_cast<Eigen::Index>(num_modes);
        return GaussianState(CMatrix::Zero(m, m), CMatrix::Zero(m, m));
    }

    size_t num_modes() const {
        return static_cast<size_t>(n_.rows());
    }
    const CMatrix &N() const {
        return n_;
    }
    const CMatrix &A() const {
        return a_;
    }

    double mean_photon(size_t i) const {
        check_mode(i);
        auto k = static_cast<Eigen::Index>(i);
        return n_(k, k).real();
    }

    double total_mean_photon() const {
        return n_.trace().real();
    }

    void check_mode(size_t i) const {
        if (i >= num_modes()) {
            std::stringstream msg;
            msg << "mode index " << i << " out of range for a " << num_modes() << "-mode state";
            throw std::invalid_argument(msg.str());
        }
    }

    /// Symmetrized quadrature covariance in interleaved (x_0, p_0, x_1, p_1, ...)
    /// order with vacuum variance 1/2.
    RMatrix quadrature_covariance() const {
        auto m = n_.rows();
        RMatrix sigma(2 * m, 2 * m);
        for (Eigen::Index i = 0; i < m; i++) {
            for (Eigen::Index j = 0; j < m; j++) {
                cplx a = a_(i, j);
                cplx n = n_(i, j);
                double d = i == j ? 0.5 : 0.0;
                sigma(2 * i, 2 * j) = a.real() + n.real() + d;
                sigma(2 * i + 1, 2 * j + 1) = n.real() - a.real() + d;
                sigma(2 * i, 2 * j + 1) = a.imag() + n.imag();
                sigma(2 * j + 1, 2 * i) = a.imag() + n.imag();
            }
        }
        return sigma;
    }

    /// Smallest eigenvalue of sigma + i Omega / 2. Nonnegative for physical states.
    double uncertainty_margin() const {
        RMatrix sigma = quadrature_covariance();
        CMatrix h = sigma.cast<cplx>();
        for (Eigen::Index i = 0; i < n_.rows(); i++) {
            h(2 * i, 2 * i + 1) += cplx(0, 0.5);
            h(2 * i + 1, 2 * i) -= cplx(0, 0.5);
        }
        Eigen::SelfAdjointEigenSolver<CMatrix> solver(h, Eigen::EigenvaluesOnly);
        return solver.eigenvalues().minCoeff();
    }

    /// Returns an empty string when every state invariant holds, otherwise the
    /// name of the first violated invariant.
    std::string violated_invariant(double tol = kExactTolerance) const {
        if (!n_.allFinite() || !a_.allFinite()) {
            return "second moments must be finite";
        }
        if ((n_ - n_.adjoint()).cwiseAbs().maxCoeff() > tol) {
            return "N must be Hermitian";
        }
        if ((a_ - a_.transpose()).cwiseAbs().maxCoeff() > tol) {
            return "A must be symmetric";
        }
        CMatrix herm = (n_ + n_.adjoint()) / 2.0;
        Eigen::SelfAdjointEigenSolver<CMatrix> solver(herm, Eigen::EigenvaluesOnly);
        if (solver.eigenvalues().minCoeff() < -tol) {
            return "N must be positive semidefinite";
        }
        if (uncertainty_margin() < -tol) {
            return "physicality sigma + i Omega/2 >= 0";
        }
        return {};
    }

    bool is_physical(double tol = kExactTolerance) const {
        return violated_invariant(tol).empty();
    }

    /// Throws NumericError naming the violated invariant.
    const GaussianState &require_physical(double tol = kExactTolerance) const {
        auto v = violated_invariant(tol);
        if (!v.empty()) {
            throw NumericError("unphysical Gaussian state: " + v);
        }
        return *this;
    }

    bool operator==(const GaussianState &other) const = default;

   private:
    CMatrix n_;
    CMatrix a_;
};

/// Applies the Heisenberg map a -> X a + Y a^dag (X, Y full MxM) to the
/// second moments.
inline GaussianState apply_bogoliubov(const GaussianState &s, const CMatrix &x, const CMatrix &y) {
    auto m = static_cast<Eigen::Index>(s.num_modes());
    if (x.rows() != m || x.cols() != m || y.rows() != m || y.cols() != m) {
        throw std::invalid_argument("Bogoliubov matrices must match the mode count");
    }
    const CMatrix &n = s.N();
    const CMatrix &a = s.A();
    CMatrix nti = n.transpose() + CMatrix::Identity(m, m);
    CMatrix xc = x.conjugate();
    CMatrix yc = y.conjugate();
    CMatrix new_n = xc * n * x.transpose() + xc * a.conjugate() * y.transpose() + yc * a * x.transpose() +
                    yc * nti * y.transpose();
    CMatrix new_a = x * a * x.transpose() + x * nti * y.transpose() + y * n * x.transpose() +
                    y * a.conjugate() * y.transpose();
    // Remove rounding asymmetry so invariants stay exact to machine precision.
    new_n = (new_n + new_n.adjoint()) / 2.0;
    new_a = (new_a + new_a.transpose()) / 2.0;
    return GaussianState(std::move(new_n), std::move(new_a));
}

namespace detail {
inline void require_distinct(const GaussianState &s, size_t i, size_t j, const char *gate) {
    s.check_mode(i);
    s.check_mode(j);
    if (i == j) {
        throw std::invalid_argument(std::string(gate) + ": gate modes must differ");
    }
}
}  // namespace detail

/// Passive two-mode gate: a_i -> u00 a_i + u01 a_j, a_j -> u10 a_i + u11 a_j.
inline GaussianState apply_passive2(const GaussianState &s, size_t i, size_t j, const Eigen::Matrix2cd &u) {
    detail::require_distinct(s, i, j, "passive gate");
    auto m = static_cast<Eigen::Index>(s.num_modes());
    CMatrix x = CMatrix::Identity(m, m);
    auto ii = static_cast<Eigen::Index>(i);
    auto jj = static_cast<Eigen::Index>(j);
    x(ii, ii) = u(0, 0);
    x(ii, jj) = u(0, 1);
    x(jj, ii) = u(1, 0);
    x(jj, jj) = u(1, 1);
    CMatrix n = x.conjugate() * s.N() * x.transpose();
    CMatrix a = x * s.A() * x.transpose();
    n = (n + n.adjoint()) / 2.0;
    a = (a + a.transpose()) / 2.0;
    return GaussianState(std::move(n), std::move(a));
}

/// Two-mode squeezer S_ij(r, phi) = exp(r e^{i phi} a_i^dag a_j^dag - h.c.).
inline GaussianState apply_squeezer(const GaussianState &s, size_t i, size_t j, double r, double phi) {
    detail::require_distinct(s, i, j, "squeeze");
    if (!(r >= 0) || !std::isfinite(r) || !std::isfinite(phi)) {
        throw std::invalid_argument("squeeze: r must be finite and >= 0");
    }
    auto m = static_cast<Eigen::Index>(s.num_modes());
    auto ii = static_cast<Eigen::Index>(i);
    auto jj = static_cast<Eigen::Index>(j);
    CMatrix x = CMatrix::Identity(m, m);
    CMatrix y = CMatrix::Zero(m, m);
    x(ii, ii) = std::cosh(r);
    x(jj, jj) = std::cosh(r);
    y(ii, jj) = std::polar(std::sinh(r), phi);
    y(jj, ii) = std::polar(std::sinh(r), phi);
    return apply_bogoliubov(s, x, y);
}

/// 50/50 Hadamard: a_i -> (a_i + a_j)/sqrt2, a_j -> (a_i - a_j)/sqrt2.
inline GaussianState apply_hadamard(const GaussianState &s, size_t i, size_t j) {
    double h = std::numbers::sqrt2 / 2;
    Eigen::Matrix2cd u;
    u << h, h, h, -h;
    return apply_passive2(s, i, j, u);
}

/// General beamsplitter with mixing angle theta (transmission cos^2 theta)
/// and phase phi.
inline GaussianState apply_beamsplitter(const GaussianState &s, size_t i, size_t j, double theta, double phi) {
    if (!std::isfinite(theta) || !std::isfinite(phi)) {
        throw std::invalid_argument("beamsplitter: parameters must be finite");
    }
    Eigen::Matrix2cd u;
    u << std::cos(theta), -std::polar(std::sin(theta), -phi), std::polar(std::sin(theta), phi), std::cos(theta);
    return apply_passive2(s, i, j, u);
}

inline GaussianState apply_swap(const GaussianState &s, size_t i, size_t j) {
    Eigen::Matrix2cd u;
    u << 0, 1, 1, 0;
    return apply_passive2(s, i, j, u);
}

/// A polarized spatial mode: indices of its horizontal and vertical submodes.
struct PolarizedMode {
    size_t h;
    size_t v;
    bool operator==(const PolarizedMode &) const = default;
};

/// Polarizing beamsplitter: transmits h, reflects v, so the v submodes of the
/// two spatial modes trade places. With reflection_phase the reflected
/// amplitudes pick up a factor i.
inline GaussianState apply_pbs(
    const GaussianState &s, PolarizedMode first, PolarizedMode second, bool reflection_phase = false) {
    size_t idx[4] = {first.h, first.v, second.h, second.v};
    for (size_t p = 0; p < 4; p++) {
        s.check_mode(idx[p]);
        for (size_t q = p + 1; q < 4; q++) {
            if (idx[p] == idx[q]) {
                throw std::invalid_argument("pbs: the four submode indices must be distinct");
            }
        }
    }
    Eigen::Matrix2cd u;
    cplx refl = reflection_phase ? cplx(0, 1) : cplx(1, 0);
    u << 0, refl, refl, 0;
    return apply_passive2(s, first.v, second.v, u);
}

/// Loss channel with intensity transmissivity t: a -> sqrt(t) a + sqrt(1-t) vac.
inline GaussianState apply_loss(const GaussianState &s, size_t i, double t) {
    s.check_mode(i);
    if (!(t >= 0 && t <= 1)) {
        throw std::invalid_argument("loss: transmissivity must lie in [0, 1]");
    }
    CMatrix n = s.N();
    CMatrix a = s.A();
    auto k = static_cast<Eigen::Index>(i);
    double f = std::sqrt(t);
    n.row(k) *= f;
    n.col(k) *= f;
    a.row(k) *= f;
    a.col(k) *= f;
    return GaussianState(std::move(n), std::move(a));
}

/// Phase-insensitive amplifier with gain parameter g:
/// a -> cosh(g) a + sinh(g) b^dag with b an independent vacuum mode.
inline GaussianState apply_gain(const GaussianState &s, size_t i, double g) {
    s.check_mode(i);
    if (!(g >= 0) || !std::isfinite(g)) {
        throw std::invalid_argument("gain: g must be finite and >= 0");
    }
    CMatrix n = s.N();
    CMatrix a = s.A();
    auto k = static_cast<Eigen::Index>(i);
    double f = std::cosh(g);
    n.row(k) *= f;
    n.col(k) *= f;
    a.row(k) *= f;
    a.col(k) *= f;
    n(k, k) += std::sinh(g) * std::sinh(g);
    return GaussianState(std::move(n), std::move(a));
}

inline double mean_photon(const GaussianState &s, size_t i) {
    return s.mean_photon(i);
}

}  // namespace tms

#endif
