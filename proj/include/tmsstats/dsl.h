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

#ifndef TMSSTATS_DSL_H
#define TMSSTATS_DSL_H

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tmsstats/circuit.h"
#include "tmsstats/errors.h"
#include "tmsstats/observable.h"

namespace tms {

struct SourceSpan {
    size_t line = 0;
    size_t column = 0;
    bool operator==(const SourceSpan &) const = default;
};

enum class QueryMode { Central, Raw, Cofluct };

inline const char *query_mode_name(QueryMode m) {
    switch (m) {
        case QueryMode::Central:
            return "central";
        case QueryMode::Raw:
            return "raw";
        case QueryMode::Cofluct:
            return "cofluct";
    }
    return "?";
}

struct QueryLine {
    QueryMode mode = QueryMode::Central;
    std::vector<QuadraticObservable> observables;
    std::vector<std::string> tokens;
    SourceSpan span;

    MomentQuery query() const {
        return {observables, mode != QueryMode::Raw, mode == QueryMode::Cofluct};
    }
    std::string label() const {
        std::string s = query_mode_name(mode);
        for (const auto &t : tokens) {
            s += " " + t;
        }
        return s;
    }
};

struct CircuitDocument {
    Circuit circuit;
    std::vector<SourceSpan> gate_spans;
    std::vector<QueryLine> queries;
};

namespace detail {

struct Token {
    std::string_view text;
    size_t column;
};

inline std::vector<Token> tokenize_line(std::string_view line) {
    std::vector<Token> out;
    auto hash = line.find('#');
    if (hash != std::string_view::npos) {
        line = line.substr(0, hash);
    }
    size_t p = 0;
    while (p < line.size()) {
        while (p < line.size() && std::isspace(static_cast<unsigned char>(line[p]))) {
            p++;
        }
        size_t start = p;
        while (p < line.size() && !std::isspace(static_cast<unsigned char>(line[p]))) {
            p++;
        }
        if (p > start) {
            out.push_back({line.substr(start, p - start), start + 1});
        }
    }
    return out;
}

class LineParser {
   public:
    LineParser(CircuitDocument &doc, size_t line, std::vector<Token> tokens)
        : doc_(doc), line_(line), tokens_(std::move(tokens)) {
    }

    [[noreturn]] void fail(size_t token, const std::string &msg) const {
        size_t col = token < tokens_.size() ? tokens_[token].column : (tokens_.empty() ? 1 : tokens_.back().column);
        throw ParseError(line_, col, msg);
    }

    void arity(size_t expected) const {
        if (tokens_.size() != expected + 1) {
            fail(tokens_.size() > expected + 1 ? expected + 1 : 0,
                 "'" + std::string(tokens_[0].text) + "' takes " + std::to_string(expected) + " arguments, got " +
                     std::to_string(tokens_.size() - 1));
        }
    }

    double number(size_t t) const {
        auto s = tokens_[t].text;
        double v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
            fail(t, "expected a finite number, got '" + std::string(s) + "'");
        }
        return v;
    }

    size_t mode(size_t t) const {
        std::string ref(tokens_[t].text);
        auto m = doc_.circuit.modes.resolve(ref);
        if (!m) {
            fail(t, "unknown mode '" + ref + "'");
        }
        return *m;
    }

    size_t spatial(size_t t, bool need_polarized) const {
        std::string ref(tokens_[t].text);
        auto k = doc_.circuit.modes.find(ref);
        if (!k) {
            fail(t, "unknown spatial mode '" + ref + "'");
        }
        if (need_polarized && !doc_.circuit.modes.spatial(*k).polarized) {
            fail(t, "mode '" + ref + "' is not polarized");
        }
        return *k;
    }

    void push(const Gate &g, size_t blame) {
        try {
            doc_.circuit.append(g);
        } catch (const std::invalid_argument &e) {
            fail(blame, e.what());
        }
        doc_.gate_spans.push_back({line_, tokens_[0].column});
    }

    void parse() {
        std::string_view head = tokens_[0].text;
        if (head == "modes") {
            parse_modes();
        } else if (head == "squeeze") {
            arity(4);
            size_t i = mode(1), j = mode(2);
            if (i == j) {
                fail(2, "gate modes must differ");
            }
            double r = number(3);
            if (r < 0) {
                fail(3, "squeeze: r must be >= 0");
            }
            push(gate::Squeeze{i, j, r, number(4)}, 0);
        } else if (head == "hadamard" || head == "swap") {
            arity(2);
            size_t i = mode(1), j = mode(2);
            if (i == j) {
                fail(2, "gate modes must differ");
            }
            if (head == "hadamard") {
                push(gate::Hadamard{i, j}, 0);
            } else {
                push(gate::Swap{i, j}, 0);
            }
        } else if (head == "bs") {
            arity(4);
            size_t i = mode(1), j = mode(2);
            if (i == j) {
                fail(2, "gate modes must differ");
            }
            push(gate::BeamSplitter{i, j, number(3), number(4)}, 0);
        } else if (head == "pbs") {
            arity(2);
            size_t a = spatial(1, true), b = spatial(2, true);
            if (a == b) {
                fail(2, "gate modes must differ");
            }
            push(gate::Pbs{a, b}, 0);
        } else if (head == "loss") {
            arity(2);
            size_t i = mode(1);
            double t = number(2);
            if (t < 0 || t > 1) {
                fail(2, "loss: transmissivity must lie in [0, 1]");
            }
            push(gate::Loss{i, t}, 0);
        } else if (head == "gain") {
            arity(2);
            size_t i = mode(1);
            double g = number(2);
            if (g < 0) {
                fail(2, "gain: g must be >= 0");
            }
            push(gate::Gain{i, g}, 0);
        } else if (head == "moment") {
            parse_moment();
        } else {
            fail(0, "unknown statement '" + std::string(head) + "'");
        }
    }

   private:
    void parse_modes() {
        if (tokens_.size() < 3) {
            fail(0, "'modes' takes a count and 'polarized' or 'plain'");
        }
        auto count_text = tokens_[1].text;
        size_t count = 0;
        auto [ptr, ec] = std::from_chars(count_text.data(), count_text.data() + count_text.size(), count);
        if (ec != std::errc() || ptr != count_text.data() + count_text.size() || count == 0) {
            fail(1, "mode count must be a positive integer");
        }
        bool polarized = false;
        if (tokens_[2].text == "polarized") {
            polarized = true;
        } else if (tokens_[2].text == "plain") {
            polarized = false;
        } else {
            fail(2, "expected 'polarized' or 'plain', got '" + std::string(tokens_[2].text) + "'");
        }
        size_t named = tokens_.size() - 3;
        if (named != 0 && named != count) {
            fail(named > count ? 3 + count : 0,
                 "expected " + std::to_string(count) + " mode names, got " + std::to_string(named));
        }
        auto &reg = doc_.circuit.modes;
        for (size_t k = 0; k < count; k++) {
            std::string name = named ? std::string(tokens_[3 + k].text) : default_mode_name(reg.num_spatial());
            if (!ModeRegistry::valid_name(name)) {
                fail(named ? 3 + k : 0, "invalid mode name '" + name + "'");
            }
            if (reg.find(name)) {
                fail(named ? 3 + k : 0, "duplicate mode name '" + name + "'");
            }
            reg.add(name, polarized);
        }
    }

    void parse_moment() {
        QueryLine q;
        q.span = {line_, tokens_[0].column};
        size_t t = 1;
        if (t < tokens_.size()) {
            auto w = tokens_[t].text;
            if (w == "central") {
                t++;
            } else if (w == "raw") {
                q.mode = QueryMode::Raw;
                t++;
            } else if (w == "cofluct") {
                q.mode = QueryMode::Cofluct;
                t++;
            }
        }
        if (t >= tokens_.size()) {
            fail(0, "moment needs at least one observable");
        }
        for (; t < tokens_.size(); t++) {
            std::string tok(tokens_[t].text);
            auto at = tok.find('@');
            if (at == std::string::npos) {
                fail(t, "expected <obs>@<mode>, got '" + tok + "'");
            }
            std::string kind = tok.substr(0, at);
            std::string ref = tok.substr(at + 1);
            if (kind == "N") {
                auto m = doc_.circuit.modes.resolve(ref);
                if (!m) {
                    fail(t, "unknown mode '" + ref + "'");
                }
                q.observables.push_back(QuadraticObservable::number(*m));
            } else if (kind.size() == 2 && kind[0] == 'S' && kind[1] >= '0' && kind[1] <= '3') {
                auto k = doc_.circuit.modes.find(ref);
                if (!k) {
                    fail(t, "unknown spatial mode '" + ref + "'");
                }
                if (!doc_.circuit.modes.spatial(*k).polarized) {
                    fail(t, "Stokes observables need a polarized mode; '" + ref + "' is plain");
                }
                q.observables.push_back(QuadraticObservable::stokes(kind[1] - '0', doc_.circuit.modes.polarized(*k)));
            } else {
                fail(t, "unknown observable '" + kind + "' (expected N, S0, S1, S2 or S3)");
            }
            q.tokens.push_back(tok);
        }
        try {
            validate_observables(q.observables, doc_.circuit.modes.num_modes());
        } catch (const std::exception &e) {
            fail(0, e.what());
        }
        doc_.queries.push_back(std::move(q));
    }

    CircuitDocument &doc_;
    size_t line_;
    std::vector<Token> tokens_;
};

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string observable_token(const ModeRegistry &modes, const QuadraticObservable &q) {
    switch (q.kind()) {
        case ObservableKind::Number:
            return "N@" + modes.mode_name(q.support()[0]);
        case ObservableKind::S0:
        case ObservableKind::S1:
        case ObservableKind::S2:
        case ObservableKind::S3: {
            for (const auto &s : modes.all_spatial()) {
                if (s.polarized && s.first == q.support()[0]) {
                    return std::string(kind_name(q.kind())) + "@" + s.name;
                }
            }
            break;
        }
        default:
            break;
    }
    throw std::invalid_argument("observable has no circuit-language form");
}

}  // namespace detail

/// Parses the line-oriented circuit language. Throws ParseError with the
/// 1-based line and column of the offending token.
inline CircuitDocument parse_circuit(std::string_view text) {
    CircuitDocument doc;
    size_t line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        std::string_view line = text.substr(pos, end - pos);
        line_no++;
        auto tokens = detail::tokenize_line(line);
        if (!tokens.empty()) {
            detail::LineParser(doc, line_no, std::move(tokens)).parse();
        }
        if (end == text.size()) {
            break;
        }
        pos = end + 1;
    }
    return doc;
}

/// Emits text that parse_circuit maps back to an identical circuit. Numbers
/// use 17 significant digits.
inline std::string serialize_circuit(const Circuit &c, const std::vector<QueryLine> &queries = {}) {
    std::ostringstream out;
    const auto &spatial = c.modes.all_spatial();
    for (size_t k = 0; k < spatial.size();) {
        size_t e = k;
        while (e < spatial.size() && spatial[e].polarized == spatial[k].polarized) {
            e++;
        }
        out << "modes " << (e - k) << (spatial[k].polarized ? " polarized" : " plain");
        for (size_t p = k; p < e; p++) {
            out << " " << spatial[p].name;
        }
        out << "\n";
        k = e;
    }
    auto name = [&](size_t m) { return c.modes.mode_name(m); };
    using detail::format_double;
    for (const auto &g : c.gates) {
        std::visit(
            [&](const auto &x) {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, gate::Squeeze>) {
                    out << "squeeze " << name(x.i) << " " << name(x.j) << " " << format_double(x.r) << " "
                        << format_double(x.phi);
                } else if constexpr (std::is_same_v<T, gate::Hadamard>) {
                    out << "hadamard " << name(x.i) << " " << name(x.j);
                } else if constexpr (std::is_same_v<T, gate::BeamSplitter>) {
                    out << "bs " << name(x.i) << " " << name(x.j) << " " << format_double(x.theta) << " "
                        << format_double(x.phi);
                } else if constexpr (std::is_same_v<T, gate::Pbs>) {
                    out << "pbs " << c.modes.spatial(x.a).name << " " << c.modes.spatial(x.b).name;
                } else if constexpr (std::is_same_v<T, gate::Loss>) {
                    out << "loss " << name(x.i) << " " << format_double(x.t);
                } else if constexpr (std::is_same_v<T, gate::Gain>) {
                    out << "gain " << name(x.i) << " " << format_double(x.g);
                } else {
                    out << "swap " << name(x.i) << " " << name(x.j);
                }
            },
            g);
        out << "\n";
    }
    for (const auto &q : queries) {
        out << "moment " << query_mode_name(q.mode);
        for (const auto &o : q.observables) {
            out << " " << detail::observable_token(c.modes, o);
        }
        out << "\n";
    }
    return out.str();
}

inline std::string serialize_document(const CircuitDocument &doc) {
    return serialize_circuit(doc.circuit, doc.queries);
}

}  // namespace tms

#endif
