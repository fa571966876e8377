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

#ifndef TMSSTATS_WICK_H
#define TMSSTATS_WICK_H

#include <array>
#include <atomic>
#include <bit>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "tmsstats/gaussian_state.h"
#include "tmsstats/observable.h"

namespace tms {

struct WickOptions {
    size_t max_observables = kDefaultMaxObservables;
    /// Worker threads; 0 means the TMS_THREADS environment variable, or the
    /// hardware concurrency when it is unset.
    size_t threads = 0;
    /// Contractions whose largest entry is below this fraction of the state's
    /// largest second moment are treated as zero and their branches skipped.
    double prune_threshold = 1e-15;
};

inline size_t resolve_thread_count(size_t requested) {
    if (requested > 0) {
        return requested;
    }
    if (const char *env = std::getenv("TMS_THREADS")) {
        char *end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) {
            return static_cast<size_t>(v);
        }
    }
    size_t hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Neumaier-compensated complex accumulator. Summation order is fixed by the
/// caller, so results are reproducible bit for bit.
class CompensatedSum {
   public:
    void add(cplx x) {
        add_part(sum_re_, comp_re_, x.real());
        add_part(sum_im_, comp_im_, x.imag());
    }
    cplx value() const {
        return {sum_re_ + comp_re_, sum_im_ + comp_im_};
    }

   private:
    static void add_part(double &sum, double &comp, double x) {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    double sum_re_ = 0, comp_re_ = 0, sum_im_ = 0, comp_im_ = 0;
};

namespace detail {

/// Dense block of at most 4x4 entries.
struct Block {
    int rows = 0;
    int cols = 0;
    std::array<cplx, 16> v{};

    cplx &at(int r, int c) {
        return v[static_cast<size_t>(r * 4 + c)];
    }
    cplx at(int r, int c) const {
        return v[static_cast<size_t>(r * 4 + c)];
    }
    Block transposed() const {
        Block t;
        t.rows = cols;
        t.cols = rows;
        for (int r = 0; r < rows; r++) {
            for (int c = 0; c < cols; c++) {
                t.at(c, r) = at(r, c);
            }
        }
        return t;
    }
    bool is_zero() const {
        for (int r = 0; r < rows; r++) {
            for (int c = 0; c < cols; c++) {
                if (at(r, c) != cplx(0)) {
                    return false;
                }
            }
        }
        return true;
    }
};

inline Block multiply(const Block &a, const Block &b) {
    Block out;
    out.rows = a.rows;
    out.cols = b.cols;
    for (int r = 0; r < a.rows; r++) {
        for (int c = 0; c < b.cols; c++) {
            cplx s = 0;
            for (int k = 0; k < a.cols; k++) {
                s += a.at(r, k) * b.at(k, c);
            }
            out.at(r, c) = s;
        }
    }
    return out;
}

/// Open path of alternating coefficient and contraction edges. The matrix is
/// indexed by (local index at end0, local index at end1).
struct Chain {
    int end0 = -1;
    int end1 = -1;
    Block m;
};

struct SearchState {
    uint32_t paired = 0;
    cplx weight = 1;
    std::array<Chain, kDefaultMaxObservables> chains{};
    std::array<int8_t, 2 * kDefaultMaxObservables> chain_of{};
};

/// Enumerates perfect pairings of the 2q ladder slots of a product of
/// quadratic observables. Slot 2j holds the creation operator of observable
/// j, slot 2j+1 its annihilation operator. Each pairing contributes the
/// product of traces around the cycles formed by coefficient blocks and
/// two-point contractions.
class PairingKernel {
   public:
    PairingKernel(const GaussianState &s, const std::vector<QuadraticObservable> &obs, bool centered, double prune)
        : num_slots_(static_cast<int>(2 * obs.size())), centered_(centered) {
        full_mask_ = num_slots_ == 0 ? 0 : static_cast<uint32_t>((uint64_t{1} << num_slots_) - 1);
        double scale = std::max(1.0, std::max(s.N().cwiseAbs().maxCoeff(), s.A().cwiseAbs().maxCoeff()));
        double cut = prune * scale;
        contraction_.resize(static_cast<size_t>(num_slots_ * num_slots_));
        nonzero_.assign(static_cast<size_t>(num_slots_ * num_slots_), 0);
        for (int x = 0; x < num_slots_; x++) {
            for (int y = x + 1; y < num_slots_; y++) {
                Block c = contraction(s, obs, x, y);
                double biggest = 0;
                for (int r = 0; r < c.rows; r++) {
                    for (int k = 0; k < c.cols; k++) {
                        biggest = std::max(biggest, std::abs(c.at(r, k)));
                    }
                }
                contraction_[idx(x, y)] = c;
                nonzero_[idx(x, y)] = biggest > cut ? 1 : 0;
            }
        }
        for (size_t j = 0; j < obs.size(); j++) {
            Chain c;
            c.end0 = static_cast<int>(2 * j);
            c.end1 = static_cast<int>(2 * j + 1);
            const CMatrix &k = obs[j].local_matrix();
            c.m.rows = static_cast<int>(k.rows());
            c.m.cols = static_cast<int>(k.cols());
            for (int r = 0; r < c.m.rows; r++) {
                for (int q = 0; q < c.m.cols; q++) {
                    c.m.at(r, q) = k(r, q);
                }
            }
            initial_.chains[j] = c;
            initial_.chain_of[2 * j] = static_cast<int8_t>(j);
            initial_.chain_of[2 * j + 1] = static_cast<int8_t>(j);
        }
    }

    cplx evaluate(size_t threads) const {
        if (num_slots_ == 0) {
            return 1;
        }
        // Fixed task decomposition: the first two pairing decisions. Each task
        // is summed independently and tasks are reduced in index order, so
        // the result does not depend on the thread count.
        std::vector<SearchState> tasks;
        SearchState root = initial_;
        expand(root, 2, tasks);
        std::vector<cplx> partial(tasks.size());
        threads = std::min(threads, tasks.size());
        if (threads <= 1) {
            for (size_t t = 0; t < tasks.size(); t++) {
                partial[t] = run_task(tasks[t]);
            }
        } else {
            std::atomic<size_t> next{0};
            std::vector<std::thread> pool;
            for (size_t w = 0; w < threads; w++) {
                pool.emplace_back([&]() {
                    for (size_t t = next++; t < tasks.size(); t = next++) {
                        partial[t] = run_task(tasks[t]);
                    }
                });
            }
            for (auto &th : pool) {
                th.join();
            }
        }
        CompensatedSum total;
        for (auto v : partial) {
            total.add(v);
        }
        return total.value();
    }

   private:
    size_t idx(int x, int y) const {
        return static_cast<size_t>(x * num_slots_ + y);
    }

    static Block contraction(const GaussianState &s, const std::vector<QuadraticObservable> &obs, int x, int y) {
        const auto &mx = obs[static_cast<size_t>(x / 2)].support();
        const auto &my = obs[static_cast<size_t>(y / 2)].support();
        bool x_creates = x % 2 == 0;
        bool y_creates = y % 2 == 0;
        Block c;
        c.rows = static_cast<int>(mx.size());
        c.cols = static_cast<int>(my.size());
        for (int r = 0; r < c.rows; r++) {
            for (int k = 0; k < c.cols; k++) {
                auto m = static_cast<Eigen::Index>(mx[static_cast<size_t>(r)]);
                auto n = static_cast<Eigen::Index>(my[static_cast<size_t>(k)]);
                cplx v;
                if (x_creates && !y_creates) {
                    v = s.N()(m, n);  // <a_m^dag a_n>
                } else if (!x_creates && y_creates) {
                    v = s.N()(n, m) + (m == n ? 1.0 : 0.0);  // <a_m a_n^dag>
                } else if (!x_creates) {
                    v = s.A()(m, n);  // <a_m a_n>
                } else {
                    v = std::conj(s.A()(m, n));  // <a_m^dag a_n^dag>
                }
                c.at(r, k) = v;
            }
        }
        return c;
    }

    template <typename Visit>
    void for_each_step(SearchState &st, Visit &&visit) const {
        int x = std::countr_zero(~st.paired);
        for (int y = x + 1; y < num_slots_; y++) {
            if (st.paired & (uint32_t{1} << y)) {
                continue;
            }
            if (centered_ && (x >> 1) == (y >> 1)) {
                continue;
            }
            if (!nonzero_[idx(x, y)]) {
                continue;
            }
            const Block &c = contraction_[idx(x, y)];
            int cx = st.chain_of[static_cast<size_t>(x)];
            int cy = st.chain_of[static_cast<size_t>(y)];
            uint32_t bits = (uint32_t{1} << x) | (uint32_t{1} << y);
            st.paired |= bits;
            if (cx == cy) {
                const Chain &ch = st.chains[static_cast<size_t>(cx)];
                cplx t = 0;
                if (ch.end0 == y) {
                    // Tr(M C): M indexed (y, x), C indexed (x, y).
                    for (int a = 0; a < ch.m.rows; a++) {
                        for (int b = 0; b < ch.m.cols; b++) {
                            t += ch.m.at(a, b) * c.at(b, a);
                        }
                    }
                } else {
                    for (int a = 0; a < ch.m.rows; a++) {
                        for (int b = 0; b < ch.m.cols; b++) {
                            t += ch.m.at(a, b) * c.at(a, b);
                        }
                    }
                }
                if (t != cplx(0)) {
                    cplx saved = st.weight;
                    st.weight *= t;
                    visit(st);
                    st.weight = saved;
                }
            } else {
                Chain saved_p = st.chains[static_cast<size_t>(cx)];
                Chain saved_q = st.chains[static_cast<size_t>(cy)];
                Chain p = saved_p;
                Chain q = saved_q;
                if (p.end0 == x) {
                    p.m = p.m.transposed();
                    std::swap(p.end0, p.end1);
                }
                if (q.end1 == y) {
                    q.m = q.m.transposed();
                    std::swap(q.end0, q.end1);
                }
                Chain merged;
                merged.end0 = p.end0;
                merged.end1 = q.end1;
                merged.m = multiply(multiply(p.m, c), q.m);
                if (!merged.m.is_zero()) {
                    st.chains[static_cast<size_t>(cx)] = merged;
                    st.chain_of[static_cast<size_t>(merged.end0)] = static_cast<int8_t>(cx);
                    st.chain_of[static_cast<size_t>(merged.end1)] = static_cast<int8_t>(cx);
                    visit(st);
                    st.chains[static_cast<size_t>(cx)] = saved_p;
                    st.chains[static_cast<size_t>(cy)] = saved_q;
                    st.chain_of[static_cast<size_t>(saved_p.end0)] = static_cast<int8_t>(cx);
                    st.chain_of[static_cast<size_t>(saved_p.end1)] = static_cast<int8_t>(cx);
                    st.chain_of[static_cast<size_t>(saved_q.end0)] = static_cast<int8_t>(cy);
                    st.chain_of[static_cast<size_t>(saved_q.end1)] = static_cast<int8_t>(cy);
                }
            }
            st.paired &= ~bits;
        }
    }

    void expand(SearchState &st, int depth, std::vector<SearchState> &out) const {
        if (depth == 0 || st.paired == full_mask_) {
            out.push_back(st);
            return;
        }
        for_each_step(st, [&](SearchState &next) { expand(next, depth - 1, out); });
    }

    void search(SearchState &st, CompensatedSum &acc) const {
        if (st.paired == full_mask_) {
            acc.add(st.weight);
            return;
        }
        for_each_step(st, [&](SearchState &next) { search(next, acc); });
    }

    cplx run_task(const SearchState &task) const {
        SearchState st = task;
        CompensatedSum acc;
        search(st, acc);
        return acc.value();
    }

    int num_slots_;
    bool centered_;
    uint32_t full_mask_ = 0;
    std::vector<Block> contraction_;
    std::vector<uint8_t> nonzero_;
    SearchState initial_;
};

}  // namespace detail

/// Ordered Wick sum over perfect pairings of the ladder operators of
/// prod_j Q_j. With centered set, pairings that contract an observable with
/// itself are excluded, which yields <prod_j (Q_j - <Q_j>)>.
inline cplx wick_moment(
    const GaussianState &s, const std::vector<QuadraticObservable> &obs, bool centered, const WickOptions &opt = {}) {
    validate_observables(obs, s.num_modes(), std::min(opt.max_observables, kDefaultMaxObservables));
    detail::PairingKernel kernel(s, obs, centered, opt.prune_threshold);
    return kernel.evaluate(resolve_thread_count(opt.threads));
}

}  // namespace tms

#endif
