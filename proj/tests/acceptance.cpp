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

// Acceptance suite: prints one PASS/FAIL line per criterion and exits nonzero
// when any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>

#include "test_util.h"
#include "tmsstats/fock.h"
#include "tmsstats/moments.h"
#include "tmsstats/planner.h"
#include "tmsstats/sampler.h"
#include "tmsstats/stabilizer.h"

using namespace tms;
using namespace tms::testing;

namespace {

struct PhysicalityLog {
    size_t states = 0;
    size_t violations = 0;
    double worst_margin = 0;
    std::string first_violation;

    void record(const GaussianState &s) {
        states++;
        double margin = s.uncertainty_margin();
        worst_margin = std::min(worst_margin, margin);
        if (margin < -1e-10) {
            if (violations == 0) {
                first_violation = s.violated_invariant();
            }
            violations++;
        }
    }
};

PhysicalityLog g_physicality;

GaussianState track(GaussianState s) {
    g_physicality.record(s);
    return s;
}

GaussianState run(const Circuit &c) {
    return simulate(c, false, [](const GaussianState &s) { g_physicality.record(s); });
}

QuadraticObservable S(int i, PolarizedMode m) {
    return QuadraticObservable::stokes(i, m);
}

std::vector<PolarizedMode> spatial_modes(const Circuit &c) {
    std::vector<PolarizedMode> out;
    for (size_t k = 0; k < c.modes.num_spatial(); k++) {
        out.push_back(c.modes.polarized(k));
    }
    return out;
}

/// Collects failed checks for one criterion.
class Criterion {
   public:
    void check(bool ok, const std::string &what) {
        checks_++;
        if (!ok && failures_.size() < 5) {
            failures_.push_back(what);
        }
        failed_ += !ok;
    }
    void near(double got, double want, double tol, const std::string &what) {
        std::ostringstream msg;
        msg.precision(12);
        msg << what << ": got " << got << ", want " << want << " +- " << tol;
        check(std::abs(got - want) <= tol, msg.str());
    }
    bool ok() const {
        return failed_ == 0;
    }
    std::string summary() const {
        std::ostringstream out;
        out << (checks_ - failed_) << "/" << checks_ << " checks";
        for (const auto &f : failures_) {
            out << "; " << f;
        }
        return out.str();
    }

   private:
    size_t checks_ = 0;
    size_t failed_ = 0;
    std::vector<std::string> failures_;
};

int g_failed = 0;

void criterion(int id, const char *title, const std::function<void(Criterion &)> &body) {
    Criterion c;
    auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception &e) {
        c.check(false, std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2d %s (%s, %.1fs)\n", c.ok() ? "PASS" : "FAIL", id, title, c.summary().c_str(), secs);
    std::fflush(stdout);
    g_failed += !c.ok();
}

void pearson_unity(Criterion &c) {
    for (double r : {0.1, 1.0, 2.3}) {
        auto s = run(tmsv_circuit(r));
        auto na = QuadraticObservable::number(0);
        auto nb = QuadraticObservable::number(1);
        c.near(pearson(s, na, nb), 1, 1e-10, "pearson r=" + std::to_string(r));
        auto h = track(apply_hadamard(s, 0, 1));
        c.near(covariance(h, na, nb), 0, 1e-12, "covariance after hadamard r=" + std::to_string(r));
    }
}

void bell_table(Criterion &c) {
    double r = 0.7;
    auto s = run(bell_circuit(r));
    PolarizedMode a{0, 1};
    PolarizedMode b{2, 3};
    double s2c2 = sh(r) * sh(r) * ch(r) * ch(r);
    double raw[4] = {2 * s2c2 + 4 * std::pow(sh(r), 4), 2 * s2c2, 2 * s2c2, -2 * s2c2};
    for (int i = 0; i < 4; i++) {
        c.near(raw_moment(s, {S(i, a), S(i, b)}), raw[i], 1e-10 * std::abs(raw[i]), "raw S" + std::to_string(i));
        double central = central_moment(s, {S(i, a), S(i, b)});
        c.near(std::abs(central), 2 * s2c2, 1e-10, "central |S" + std::to_string(i) + "|");
        for (int j = 0; j < 4; j++) {
            if (i != j) {
                c.check(std::abs(raw_moment(s, {S(i, a), S(j, b)})) < 1e-12, "cross term " + std::to_string(i) + std::to_string(j));
            }
        }
    }
    c.check(raw_moment(s, {S(3, a), S(3, b)}) < 0, "S3 S3 negative");
}

void polarization_means(Criterion &c) {
    for (double r : {0.3, 1.5}) {
        auto s = run(bell_circuit(r));
        for (PolarizedMode m : {PolarizedMode{0, 1}, PolarizedMode{2, 3}}) {
            c.near(expectation(s, S(0, m)), 2 * sh(r) * sh(r), 1e-12 * std::max(1.0, sh(r) * sh(r)), "S0 mean");
            for (int i = 1; i <= 3; i++) {
                c.near(expectation(s, S(i, m)), 0, 1e-12, "S" + std::to_string(i) + " mean");
            }
        }
    }
}

void rebalancing(Criterion &c) {
    double r1 = 1.0;
    double r2 = 0.6;
    PolarizedMode a{0, 1};
    PolarizedMode b{2, 3};
    auto base = run(unequal_bell_circuit(r1, r2));
    double t = rebalance_loss(r1, r2);
    double g = rebalance_gain(r1, r2);
    c.near(t, std::sinh(1.2) / std::sinh(2.0), 1e-15, "transmissivity");
    c.near(std::cosh(g) * std::cosh(g), std::sinh(2.0) / std::sinh(1.2), 1e-12, "gain");
    auto lossy = track(apply_loss(track(apply_loss(base, a.h, t)), b.h, t));
    auto gained = track(apply_gain(track(apply_gain(base, a.v, g)), b.v, g));
    for (const auto *s : {&lossy, &gained}) {
        auto rho = moment_tensor(*s, {a, b}).rendered();
        double eta = rho(0, 0).real();
        c.near(rho(0, 3).real(), eta, 1e-9, "mu == eta");
        c.near(rho(3, 3).real(), eta, 1e-9, "nu == eta");
        c.check(pearson(*s, S(0, a), S(0, b)) < 1, "pearson below one");
    }
}

void ghz_pattern(Criterion &c) {
    double r = 0.5;
    double delta = delta_of(r);
    auto g = ghz_circuit(2, r);
    auto s = run(g.circuit);
    auto modes = spatial_modes(g.circuit);
    std::vector<QuadraticObservable> s0;
    for (auto m : modes) {
        c.near(variance(s, S(0, m)), 2 * std::sqrt(delta), 1e-10, "variance");
        s0.push_back(S(0, m));
    }
    auto t = moment_tensor(s, modes);
    size_t nonzero = 0;
    for (double v : t.entries) {
        if (std::abs(v) > 1e-10) {
            nonzero++;
            c.near(std::abs(v), 2 * delta, 1e-10, "stabilizer-type moment");
        }
    }
    c.check(nonzero > 1, "nonzero stabilizer-type moments present");
    c.near(cofluctuation(s, s0), 0.5, 1e-10, "co-fluctuation k=2");
    for (size_t k : {1, 2, 3}) {
        auto gk = ghz_circuit(k, r);
        auto sk = run(gk.circuit);
        std::vector<QuadraticObservable> obs;
        for (auto m : spatial_modes(gk.circuit)) {
            obs.push_back(S(0, m));
        }
        c.near(cofluctuation(sk, obs), std::ldexp(1.0, 1 - static_cast<int>(k)), 1e-10, "co-fluctuation k=" + std::to_string(k));
    }
}

void cluster_stabilizers(Criterion &c) {
    double r = 0.5;
    auto c2 = cluster2_circuit(r);
    auto s2 = run(c2.circuit);
    auto a = c2.circuit.modes.polarized(c2.graph.spatial_mode(0));
    auto b = c2.circuit.modes.polarized(c2.graph.spatial_mode(1));
    double target = 2 * std::sqrt(delta_of(r));
    c.near(central_moment(s2, {S(2, a), S(1, b)}), target, 1e-10, "cluster2 <S2 S1>");
    c.near(central_moment(s2, {S(1, a), S(2, b)}), target, 1e-10, "cluster2 <S1 S2>");
    double before = stabilizer_report(s2, c2.circuit.modes, c2.graph).cofluctuation[0];

    auto st = star_circuit(r);
    auto rep = stabilizer_report(run(st.circuit), st.circuit.modes, st.graph);
    c.check(rep.all_nonzero, "star stabilizers nonzero");
    for (size_t v = 0; v < rep.beta.size(); v++) {
        c.near(rep.beta[v], rep.beta[0], 1e-9, "star stabilizers equal");
        c.near(rep.cofluctuation[v], before / 2, 1e-9, "star co-fluctuation halves");
    }
}

void scaling_law(Criterion &c) {
    for (auto [n, r] : std::vector<std::pair<size_t, double>>{{2, 1.0}, {4, 1.0}, {10, 0.4}}) {
        auto circuit = bell_pairs_circuit(n / 2, r);
        auto s = run(circuit);
        std::vector<QuadraticObservable> obs;
        for (auto m : spatial_modes(circuit)) {
            obs.push_back(S(0, m));
        }
        double want = scaling_moment(n, r);
        c.near(central_moment(s, obs), want, 1e-9 * want, "n=" + std::to_string(n));
    }
}

void loss_budget_check(Criterion &c) {
    auto round1 = [](double v) { return std::round(v * 10) / 10; };
    auto b0 = loss_budget(2.3, 0, false);
    c.near(b0.gamma_max, 0.02843, 5e-6, "gamma_max");
    c.near(b0.gamma_max_db, -15.46, 5e-3, "gamma_max dB");
    c.near(std::round(b0.mean_photons_per_spatial_mode), 49, 0, "photons per spatial mode");
    auto b3 = loss_budget(2.3, 3, false);
    auto bf = loss_budget(2.3, 3, true);
    c.near(b3.residual_db, -6.42, 0.015, "residual, exact dB");
    c.near(bf.residual_db, -3.41, 0.015, "residual with feed-forward, exact dB");
    c.near(round1(b3.residual_db_nominal), -6.5, 1e-12, "residual, paper rounding");
    c.near(round1(bf.residual_db_nominal), -3.5, 1e-12, "residual with feed-forward, paper rounding");
}

void oracle_equivalence(Criterion &c) {
    std::mt19937_64 rng(2025);
    size_t queries = 0;
    double worst = 0;
    for (int k = 0; k < 200; k++) {
        bool channel = rng() % 2;
        auto circuit = random_circuit(rng, 6, 3, 4, 0.3, channel);
        auto s = run(circuit);
        auto f = oracle_state(circuit, 12);
        std::vector<std::vector<QuadraticObservable>> qs;
        for (size_t i = 0; i < 6; i++) {
            for (size_t j = i; j < 6; j++) {
                qs.push_back({QuadraticObservable::number(i), QuadraticObservable::number(j)});
            }
        }
        for (int t = 0; t < 4; t++) {
            std::vector<size_t> order(6);
            std::iota(order.begin(), order.end(), 0);
            std::shuffle(order.begin(), order.end(), rng);
            qs.push_back({random_observable(rng, {order[0], order[1]}), random_observable(rng, {order[2]})});
        }
        for (const auto &q : qs) {
            double exact = central_moment(s, q);
            double allowed = std::max(1e-6 * std::abs(exact), 1e-10);
            double err = std::abs(oracle_moment(f, {q}) - exact);
            worst = std::max(worst, err / allowed);
            c.check(err <= allowed, "circuit " + std::to_string(k) + " disagrees");
            queries++;
        }
    }
    c.check(queries == 200 * 25, "query count");
    std::printf("     oracle equivalence: %zu queries, worst error %.3g of the allowed tolerance\n", queries, worst);
}

void wick_equivalence(Criterion &c) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 100; trial++) {
        size_t modes = 2 + rng() % 5;
        auto s = run(random_circuit(rng, modes, 3, 6, 1.2, rng() % 2));
        std::vector<size_t> order(modes);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        size_t q = 1 + rng() % std::min<size_t>(4, modes);
        std::vector<QuadraticObservable> obs;
        size_t used = 0;
        for (size_t j = 0; j < q && used < modes; j++) {
            size_t width = std::min<size_t>(1 + rng() % 2, modes - used);
            obs.push_back(random_observable(rng, std::vector<size_t>(order.begin() + used, order.begin() + used + width)));
            used += width;
        }
        // Relative to the natural size of the product, so that moments which
        // cancel to near zero are not judged against their own rounding.
        double scale = 1;
        for (const auto &o : obs) {
            scale *= std::sqrt(raw_moment(s, {o, o}));
        }
        double a = central_moment(s, obs);
        double b = central_moment_by_inclusion_exclusion(s, obs);
        c.check(std::abs(a - b) <= 1e-9 * std::max(std::abs(b), scale), "trial " + std::to_string(trial));
    }
}

void sampler_convergence(Criterion &c) {
    auto s = run(bell_circuit(1.0));
    PolarizedMode a{0, 1};
    PolarizedMode b{2, 3};
    std::vector<MomentQuery> queries;
    for (int i = 0; i < 4; i++) {
        queries.push_back({{S(i, a), S(i, b)}});
    }
    queries.push_back({{S(1, a), S(2, b)}});
    queries.push_back({{S(0, a), S(3, b)}});
    queries.push_back({{QuadraticObservable::number(0)}, false});
    queries.push_back({{S(2, a), S(2, a)}});
    std::vector<double> exact;
    for (const auto &q : queries) {
        exact.push_back(evaluate(s, q));
    }
    size_t within = 0;
    size_t total = 0;
    for (uint64_t seed = 0; seed < 100; seed++) {
        auto batch = sample_state(s, 100000, seed);
        for (size_t k = 0; k < queries.size(); k++) {
            auto e = estimate_query(batch, queries[k]);
            within += std::abs(e.estimate - exact[k]) < 5 * e.stderr_;
            total++;
        }
    }
    double fraction = static_cast<double>(within) / static_cast<double>(total);
    std::ostringstream msg;
    msg << within << "/" << total << " estimates within 5 standard errors";
    c.check(fraction >= 0.99, msg.str());
    for (const auto &q : queries) {
        double small = estimate_query(sample_state(s, 1000, 7), q).stderr_;
        double large = estimate_query(sample_state(s, 100000, 7), q).stderr_;
        c.near(small / large, 10, 2, "stderr ratio over two decades of shots");
    }
}

void physicality(Criterion &c) {
    std::ostringstream msg;
    msg << g_physicality.states << " states, worst margin " << g_physicality.worst_margin;
    if (g_physicality.violations) {
        msg << ", first violation: " << g_physicality.first_violation;
    }
    c.check(g_physicality.states > 0 && g_physicality.violations == 0, msg.str());
}

}  // namespace

int main() {
    criterion(1, "Pearson unity and Hadamard decorrelation", pearson_unity);
    criterion(2, "Bell Stokes table", bell_table);
    criterion(3, "Polarization means", polarization_means);
    criterion(4, "Rebalancing by loss and by gain", rebalancing);
    criterion(5, "GHZ moment pattern and co-fluctuation 2^(1-k)", ghz_pattern);
    criterion(6, "Cluster stabilizers", cluster_stabilizers);
    criterion(7, "Scaling of the S0 product moment", scaling_law);
    criterion(8, "Loss budget", loss_budget_check);
    criterion(9, "Engine and Fock oracle agree on random circuits", oracle_equivalence);
    criterion(10, "Pairing restriction equals inclusion-exclusion", wick_equivalence);
    criterion(11, "Sampler convergence", sampler_convergence);
    criterion(12, "Physicality of every state", physicality);
    std::printf("%s: %d criteria failed\n", g_failed ? "FAIL" : "PASS", g_failed);
    return g_failed ? 1 : 0;
}
