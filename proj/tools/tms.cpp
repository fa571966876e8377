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

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "tmsstats/dsl.h"
#include "tmsstats/fock.h"
#include "tmsstats/moments.h"
#include "tmsstats/planner.h"
#include "tmsstats/sampler.h"
#include "tmsstats/stabilizer.h"

using json = nlohmann::ordered_json;
using namespace tms;

namespace {

constexpr const char *kFormatVersion = "1.0";

enum ExitCode { kOk = 0, kParseFailure = 1, kNumericFailure = 2 };

json new_report(const std::string &command) {
    json r;
    r["format_version"] = kFormatVersion;
    r["command"] = command;
    r["status"] = "ok";
    return r;
}

/// JSON cannot hold inf/nan; those become null.
json num(double v) {
    if (!std::isfinite(v)) {
        return nullptr;
    }
    return v;
}

void emit(const json &report) {
    std::cout << report.dump(2) << "\n";
}

int fail(const std::string &command, const std::string &kind, const std::string &message, int code, bool as_json) {
    std::cerr << "tms " << command << ": " << message << "\n";
    if (as_json) {
        json r = new_report(command);
        r["status"] = "error";
        r["error"] = {{"kind", kind}, {"message", message}};
        emit(r);
    }
    return code;
}

/// Simulates and checks physicality of every intermediate state.
GaussianState simulate_checked(const Circuit &c) {
    size_t step = 0;
    return simulate(c, false, [&](const GaussianState &s) {
        auto v = s.violated_invariant();
        if (!v.empty()) {
            throw NumericError("unphysical Gaussian state after gate " + std::to_string(step) + ": " + v);
        }
        step++;
    });
}

json physicality_json(const GaussianState &s) {
    return {{"uncertainty_margin", num(s.uncertainty_margin())}, {"physical", s.is_physical()}};
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    std::string file;
    bool oracle = false;
    int cutoff = 12;
    bool sample = false;
    size_t shots = 100000;
    uint64_t seed = 1;
    bool csv = false;
};

std::string csv_cell(const json &v) {
    if (v.is_null()) {
        return "";
    }
    if (v.is_number()) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
        return buf;
    }
    return v.get<std::string>();
}

int run_simulate(const SimulateArgs &a) {
    std::ifstream in(a.file);
    if (!in) {
        return fail("simulate", "io", "cannot read '" + a.file + "'", kParseFailure, !a.csv);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    CircuitDocument doc;
    try {
        doc = parse_circuit(buf.str());
    } catch (const ParseError &e) {
        std::cerr << a.file << ":" << e.what() << "\n";
        if (!a.csv) {
            json r = new_report("simulate");
            r["status"] = "error";
            r["error"] = {{"kind", "parse"}, {"message", e.what()}, {"line", e.line}, {"column", e.column}};
            emit(r);
        }
        return kParseFailure;
    }

    json r = new_report("simulate");
    r["circuit"] = {{"file", a.file}, {"modes", doc.circuit.modes.num_modes()}, {"gates", doc.circuit.gates.size()}};
    r["circuit_text"] = serialize_document(doc);
    GaussianState s = simulate_checked(doc.circuit);
    r["physicality"] = physicality_json(s);

    std::optional<FockVector> fock;
    if (a.oracle) {
        fock = oracle_state(doc.circuit, a.cutoff);
        r["oracle"] = {{"cutoff", a.cutoff}, {"truncation_error", fock->truncation_error()}, {"amplitudes", fock->size()}};
    }
    std::optional<SampleBatch> batch;
    if (a.sample) {
        batch = sample_state(s, a.shots, a.seed);
        char fp[20];
        std::snprintf(fp, sizeof fp, "%016llx", static_cast<unsigned long long>(batch->fingerprint));
        r["sample"] = {{"shots", a.shots}, {"seed", a.seed}, {"fingerprint", fp}};
    }

    json queries = json::array();
    for (const auto &q : doc.queries) {
        json row;
        row["label"] = q.label();
        row["mode"] = query_mode_name(q.mode);
        row["line"] = q.span.line;
        double exact = evaluate(s, q.query());
        row["exact"] = num(exact);
        if (fock) {
            double o = oracle_moment(*fock, q.query());
            row["oracle"] = num(o);
            row["oracle_abs_diff"] = num(std::abs(o - exact));
            row["oracle_rel_diff"] = num(std::abs(o - exact) / std::max(std::abs(exact), 1e-300));
        }
        if (batch) {
            try {
                auto e = estimate_query(*batch, q.query());
                row["sample"] = {
                    {"estimate", num(e.estimate)}, {"stderr", num(e.stderr_)}, {"shots", e.shots}, {"z", num(e.z)}};
            } catch (const std::invalid_argument &e) {
                row["sample"] = nullptr;
                row["sample_note"] = e.what();
            }
        }
        queries.push_back(row);
    }
    r["queries"] = queries;

    if (a.csv) {
        std::cout << "label,mode,exact,oracle,oracle_rel_diff,sample_estimate,sample_stderr,sample_z\n";
        for (const auto &row : queries) {
            json sample = row.contains("sample") ? row["sample"] : json(nullptr);
            auto field = [&](const json &obj, const char *key) {
                return obj.is_object() && obj.contains(key) ? csv_cell(obj[key]) : std::string();
            };
            std::cout << row["label"].get<std::string>() << "," << row["mode"].get<std::string>() << ","
                      << csv_cell(row["exact"]) << "," << field(row, "oracle") << "," << field(row, "oracle_rel_diff")
                      << "," << field(sample, "estimate") << "," << field(sample, "stderr") << ","
                      << field(sample, "z") << "\n";
        }
    } else {
        emit(r);
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// bell

json bell_statistics(const GaussianState &s, PolarizedMode pa, PolarizedMode pb) {
    json out;
    json means = {{"a", json::array()}, {"b", json::array()}};
    for (int i = 0; i < 4; i++) {
        means["a"].push_back(num(expectation(s, QuadraticObservable::stokes(i, pa))));
        means["b"].push_back(num(expectation(s, QuadraticObservable::stokes(i, pb))));
    }
    out["stokes_means"] = means;
    auto t = moment_tensor(s, {pa, pb});
    json table = json::array();
    for (int i = 0; i < 4; i++) {
        json row = json::array();
        for (int j = 0; j < 4; j++) {
            int idx[2] = {i, j};
            row.push_back(num(t.at(idx)));
        }
        table.push_back(row);
    }
    out["central_stokes"] = table;
    CMatrix rho = t.rendered();
    out["rho"] = {
        {"eta", num(rho(0, 0).real())},
        {"mu", num(rho(0, 3).real())},
        {"nu", num(rho(3, 3).real())},
        {"trace", num(t.trace())}};
    auto s0a = QuadraticObservable::stokes(0, pa);
    auto s0b = QuadraticObservable::stokes(0, pb);
    out["pearson_s0"] = num(pearson(s, s0a, s0b));
    out["pearson_nh"] = num(pearson(s, QuadraticObservable::number(pa.h), QuadraticObservable::number(pb.h)));
    return out;
}

int run_bell(double r, std::optional<double> r2, const std::string &rebalance, bool emit_circuit) {
    double rv = r2.value_or(r);
    Circuit c = unequal_bell_circuit(r, rv);
    auto pa = c.modes.polarized(0);
    auto pb = c.modes.polarized(1);
    if (!rebalance.empty()) {
        if (rebalance == "loss") {
            double t = rebalance_loss(r, rv);
            c.append(gate::Loss{pa.h, t});
            c.append(gate::Loss{pb.h, t});
        } else {
            double g = rebalance_gain(r, rv);
            c.append(gate::Gain{pa.v, g});
            c.append(gate::Gain{pb.v, g});
        }
    }
    if (emit_circuit) {
        std::cout << serialize_circuit(c);
        return kOk;
    }
    json rep = new_report("bell");
    rep["parameters"] = {{"r_h", r}, {"r_v", rv}};
    Circuit source = unequal_bell_circuit(r, rv);
    GaussianState s0_state = simulate_checked(source);
    rep["bell"] = bell_statistics(s0_state, pa, pb);
    rep["physicality"] = physicality_json(s0_state);
    if (!rebalance.empty()) {
        GaussianState s1 = simulate_checked(c);
        json rb;
        rb["mode"] = rebalance;
        if (rebalance == "loss") {
            rb["transmissivity"] = rebalance_loss(r, rv);
            rb["modes"] = {c.modes.mode_name(pa.h), c.modes.mode_name(pb.h)};
        } else {
            rb["gain"] = rebalance_gain(r, rv);
            rb["modes"] = {c.modes.mode_name(pa.v), c.modes.mode_name(pb.v)};
        }
        rb["after"] = bell_statistics(s1, pa, pb);
        std::vector<QuadraticObservable> s0 = {QuadraticObservable::stokes(0, pa), QuadraticObservable::stokes(0, pb)};
        double pre[2] = {variance(s0_state, s0[0]), variance(s0_state, s0[1])};
        rb["cofluctuation_s0_post_variances"] = num(cofluctuation(s1, s0));
        rb["cofluctuation_s0_pre_variances"] = num(cofluctuation_with_variances(s1, s0, pre));
        rep["rebalance"] = rb;
        rep["physicality"] = physicality_json(s1);
    }
    rep["circuit_text"] = serialize_circuit(c);
    emit(rep);
    return kOk;
}

// ---------------------------------------------------------------------------
// ghz

int run_ghz(size_t pairs, double r, double z, bool emit_circuit) {
    auto g = ghz_circuit(pairs, r);
    if (emit_circuit) {
        std::cout << serialize_circuit(g.circuit);
        return kOk;
    }
    GaussianState s = simulate_checked(g.circuit);
    json rep = new_report("ghz");
    size_t n = g.ring.size();
    double delta = std::pow(std::sinh(r) * std::cosh(r), 4);
    std::vector<QuadraticObservable> s0;
    std::vector<PolarizedMode> modes;
    json variances = json::array();
    for (auto k : g.ring) {
        auto p = g.circuit.modes.polarized(k);
        modes.push_back(p);
        s0.push_back(QuadraticObservable::stokes(0, p));
        variances.push_back(num(variance(s, s0.back())));
    }
    json ghz;
    ghz["pairs"] = pairs;
    ghz["spatial_modes"] = n;
    ghz["r"] = r;
    ghz["delta"] = delta;
    ghz["variance_s0"] = variances;
    ghz["product_s0"] = num(central_moment(s, s0));
    ghz["cofluctuation"] = num(cofluctuation(s, s0));
    ghz["predicted_cofluctuation"] = std::ldexp(1.0, 1 - static_cast<int>(pairs));
    if (n <= 4) {
        auto t = moment_tensor(s, modes);
        json nonzero = json::array();
        for (size_t flat = 1; flat < t.entries.size(); flat++) {
            if (std::abs(t.entries[flat]) > 1e-12 * std::abs(t.trace())) {
                std::string pattern;
                for (int d : MomentTensor::digits(flat, n)) {
                    pattern += static_cast<char>('0' + d);
                }
                nonzero.push_back({{"pattern", pattern}, {"value", t.entries[flat]}});
            }
        }
        ghz["nonzero_moments"] = nonzero;
    }
    if (2 * n <= kDefaultMaxObservables) {
        auto res = shots_to_resolve(s, s0, z);
        ghz["shots_to_resolve"] = res.shots ? json(*res.shots) : json(nullptr);
    }
    ghz["z"] = z;
    rep["ghz"] = ghz;
    rep["physicality"] = physicality_json(s);
    rep["circuit_text"] = serialize_circuit(g.circuit);
    emit(rep);
    return kOk;
}

// ---------------------------------------------------------------------------
// cluster

int run_cluster(const std::string &kind, size_t rows, size_t cols, double r, double z, bool emit_circuit) {
    Construction c;
    if (kind == "star") {
        c = star_circuit(r);
    } else if (kind == "chain") {
        c = linear_chain(cols, r);
    } else {
        c = grid(rows, cols, r);
    }
    if (emit_circuit) {
        std::cout << serialize_circuit(c.circuit);
        return kOk;
    }
    GaussianState s = simulate_checked(c.circuit);
    json rep = new_report("cluster");
    json cl;
    cl["kind"] = kind;
    cl["r"] = r;
    const auto &g = c.graph;
    json vertices = json::array();
    for (size_t v = 0; v < g.num_vertices(); v++) {
        json nb = json::array();
        for (auto u : g.neighbors(v)) {
            nb.push_back(u);
        }
        vertices.push_back({{"vertex", v}, {"mode", c.circuit.modes.spatial(g.spatial_mode(v)).name}, {"neighbors", nb}});
    }
    cl["vertices"] = vertices;
    json edges = json::array();
    for (auto [u, v] : g.edges()) {
        edges.push_back({u, v});
    }
    cl["edges"] = edges;
    cl["leaves"] = g.leaves().size();
    cl["pbs_ops"] = g.pbs_ops();
    cl["predicted_cofluctuation"] = predicted_cofluctuation(g.pbs_ops());
    cl["verifiable"] = c.verifiable;
    int code = kOk;
    if (c.verifiable) {
        auto sr = stabilizer_report(s, c.circuit.modes, g);
        json stab = json::array();
        for (size_t v = 0; v < g.num_vertices(); v++) {
            std::string pattern;
            for (int d : stabilizer_pattern(g, v)) {
                pattern += static_cast<char>('0' + d);
            }
            stab.push_back(
                {{"vertex", v},
                 {"pattern", pattern},
                 {"beta", num(sr.beta[v])},
                 {"residual", num(sr.residual[v])},
                 {"cofluctuation", num(sr.cofluctuation[v])}});
        }
        cl["stabilizers"] = stab;
        cl["all_nonzero"] = sr.all_nonzero;
        cl["residuals_small"] = sr.residuals_small;
        cl["equal_as_predicted"] = sr.equal_as_predicted;
        cl["pass"] = sr.pass;
        std::vector<QuadraticObservable> s0;
        for (size_t v = 0; v < g.num_vertices(); v++) {
            s0.push_back(QuadraticObservable::stokes(0, c.circuit.modes.polarized(g.spatial_mode(v))));
        }
        cl["cofluctuation_s0"] = num(cofluctuation(s, s0));
        if (2 * g.num_vertices() <= kDefaultMaxObservables) {
            auto res = shots_to_resolve(s, stokes_query(c.circuit.modes, g, stabilizer_pattern(g, 0)), z);
            cl["shots_to_resolve_vertex0"] = res.shots ? json(*res.shots) : json(nullptr);
        }
        cl["z"] = z;
        if (!sr.pass) {
            rep["status"] = "error";
            rep["error"] = {{"kind", "numeric"}, {"message", "stabilizer moments do not follow the graph"}};
            code = kNumericFailure;
        }
    }
    rep["cluster"] = cl;
    rep["physicality"] = physicality_json(s);
    rep["circuit_text"] = serialize_circuit(c.circuit);
    emit(rep);
    return code;
}

// ---------------------------------------------------------------------------
// budget

int run_budget(double r, size_t ops, bool feedforward) {
    auto b = loss_budget(r, ops, feedforward);
    json rep = new_report("budget");
    rep["budget"] = {
        {"r", b.r},
        {"gamma_max", b.gamma_max},
        {"gamma_max_db", b.gamma_max_db},
        {"pbs_ops_per_mode", b.pbs_ops_per_mode},
        {"feedforward", b.feedforward_penalty},
        {"spent_db", b.spent_db},
        {"residual_db", b.residual_db},
        {"spent_db_nominal", b.spent_db_nominal},
        {"residual_db_nominal", b.residual_db_nominal},
        {"mean_photons_per_spatial_mode", b.mean_photons_per_spatial_mode},
        {"feasible", b.feasible}};
    emit(rep);
    return kOk;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"tmsstats: central-moment statistics of two-mode squeezed states"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto *simulate_cmd = app.add_subcommand("simulate", "Run a circuit file and evaluate its moment queries");
    simulate_cmd->add_option("file", sim.file, "Circuit file (.tms)")->required();
    simulate_cmd->add_flag("--oracle", sim.oracle, "Also evaluate queries on the truncated Fock oracle");
    simulate_cmd->add_option("--cutoff", sim.cutoff, "Fock cutoff per mode")->check(CLI::Range(4, 255));
    simulate_cmd->add_flag("--sample", sim.sample, "Also estimate queries from Husimi samples");
    simulate_cmd->add_option("--shots", sim.shots, "Sample count")->check(CLI::PositiveNumber);
    simulate_cmd->add_option("--seed", sim.seed, "Sampler seed");
    auto *json_flag = simulate_cmd->add_flag("--json", "JSON report (default)");
    auto *csv_flag = simulate_cmd->add_flag("--csv", sim.csv, "CSV moment table");
    json_flag->excludes(csv_flag);

    double bell_r = 0;
    std::optional<double> bell_r2;
    std::string bell_rebalance;
    bool bell_emit = false;
    auto *bell_cmd = app.add_subcommand("bell", "Two-mode squeezed Bell analogue statistics");
    bell_cmd->add_option("--r", bell_r, "Squeezing of the h pair")->required()->check(CLI::NonNegativeNumber);
    bell_cmd->add_option("--r2", bell_r2, "Squeezing of the v pair (default: r)")->check(CLI::NonNegativeNumber);
    bell_cmd->add_option("--rebalance", bell_rebalance, "Rebalance unequal squeezing")
        ->check(CLI::IsMember({"loss", "gain"}));
    bell_cmd->add_flag("--emit", bell_emit, "Print the circuit instead of a report");
    bell_cmd->add_flag("--json", "JSON report (default)");

    size_t ghz_pairs = 2;
    double ghz_r = 0;
    double ghz_z = 5;
    bool ghz_emit = false;
    auto *ghz_cmd = app.add_subcommand("ghz", "GHZ analogue from a ring of two-mode squeezers");
    ghz_cmd->add_option("--pairs", ghz_pairs, "Number of squeezed pairs k (2k spatial modes)")
        ->required()
        ->check(CLI::Range(1, 6));
    ghz_cmd->add_option("--r", ghz_r, "Squeezing")->required()->check(CLI::PositiveNumber);
    ghz_cmd->add_option("--z", ghz_z, "Confidence for shots_to_resolve")->check(CLI::PositiveNumber);
    ghz_cmd->add_flag("--emit", ghz_emit, "Print the circuit instead of a report");
    ghz_cmd->add_flag("--json", "JSON report (default)");

    std::string cluster_kind = "star";
    size_t cluster_rows = 1;
    size_t cluster_cols = 1;
    double cluster_r = 0;
    double cluster_z = 5;
    bool cluster_emit = false;
    auto *cluster_cmd = app.add_subcommand("cluster", "Plan a cluster analogue and check its stabilizer moments");
    cluster_cmd->add_option("--kind", cluster_kind, "star, chain or grid")
        ->check(CLI::IsMember({"star", "chain", "grid"}));
    cluster_cmd->add_option("--rows", cluster_rows, "Grid rows")->check(CLI::Range(1, 64));
    cluster_cmd->add_option("--cols", cluster_cols, "Backbone length of each chain")->check(CLI::Range(1, 64));
    cluster_cmd->add_option("--r", cluster_r, "Squeezing")->required()->check(CLI::PositiveNumber);
    cluster_cmd->add_option("--z", cluster_z, "Confidence for shots_to_resolve")->check(CLI::PositiveNumber);
    cluster_cmd->add_flag("--emit", cluster_emit, "Print the circuit instead of a report");
    cluster_cmd->add_flag("--json", "JSON report (default)");

    double budget_r = 0;
    size_t budget_ops = 0;
    bool budget_ff = false;
    auto *budget_cmd = app.add_subcommand("budget", "Loss budget of a cluster construction");
    budget_cmd->add_option("--r", budget_r, "Squeezing")->required()->check(CLI::PositiveNumber);
    budget_cmd->add_option("--pbs-ops", budget_ops, "PBS operations per mode")->required();
    budget_cmd->add_flag("--feedforward", budget_ff, "Include the feed-forward post-selection factor");
    budget_cmd->add_flag("--json", "JSON report (default)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kParseFailure;
    }

    std::string name = app.get_subcommands().front()->get_name();
    bool as_json = !sim.csv;
    try {
        if (*simulate_cmd) {
            return run_simulate(sim);
        }
        if (*bell_cmd) {
            if (!bell_rebalance.empty() && !bell_r2) {
                return fail(name, "argument", "--rebalance needs --r2", kParseFailure, as_json);
            }
            return run_bell(bell_r, bell_r2, bell_rebalance, bell_emit);
        }
        if (*ghz_cmd) {
            return run_ghz(ghz_pairs, ghz_r, ghz_z, ghz_emit);
        }
        if (*cluster_cmd) {
            return run_cluster(cluster_kind, cluster_rows, cluster_cols, cluster_r, cluster_z, cluster_emit);
        }
        return run_budget(budget_r, budget_ops, budget_ff);
    } catch (const ParseError &e) {
        return fail(name, "parse", e.what(), kParseFailure, as_json);
    } catch (const NumericError &e) {
        return fail(name, "numeric", e.what(), kNumericFailure, as_json);
    } catch (const CapacityError &e) {
        return fail(name, "capacity", e.what(), kNumericFailure, as_json);
    } catch (const UnsupportedCircuit &e) {
        return fail(name, "unsupported", e.what(), kNumericFailure, as_json);
    } catch (const std::invalid_argument &e) {
        return fail(name, "argument", e.what(), kParseFailure, as_json);
    }
}
