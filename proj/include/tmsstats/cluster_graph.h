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

#ifndef TMSSTATS_CLUSTER_GRAPH_H
#define TMSSTATS_CLUSTER_GRAPH_H

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tms {

/// Which equality the construction predicts among the per-vertex stabilizer
/// moments.
enum class BetaEquality { None, Signed, Magnitude };

/// Simple undirected graph whose vertices are polarized spatial modes (by
/// registry index).
class ClusterGraph {
   public:
    size_t add_vertex(size_t spatial_mode) {
        if (vertex_of(spatial_mode) != npos) {
            throw std::invalid_argument("spatial mode already a vertex");
        }
        modes_.push_back(spatial_mode);
        adj_.emplace_back();
        return modes_.size() - 1;
    }

    void add_edge(size_t u, size_t v) {
        check(u);
        check(v);
        if (u == v) {
            throw std::invalid_argument("cluster graphs have no self loops");
        }
        adj_[u].insert(v);
        adj_[v].insert(u);
    }

    void remove_edge(size_t u, size_t v) {
        check(u);
        check(v);
        adj_[u].erase(v);
        adj_[v].erase(u);
    }

    size_t num_vertices() const {
        return modes_.size();
    }
    size_t spatial_mode(size_t v) const {
        check(v);
        return modes_[v];
    }
    const std::vector<size_t> &spatial_modes() const {
        return modes_;
    }

    static constexpr size_t npos = static_cast<size_t>(-1);

    size_t vertex_of(size_t spatial_mode) const {
        auto it = std::find(modes_.begin(), modes_.end(), spatial_mode);
        return it == modes_.end() ? npos : static_cast<size_t>(it - modes_.begin());
    }

    const std::set<size_t> &neighbors(size_t v) const {
        check(v);
        return adj_[v];
    }

    bool has_edge(size_t u, size_t v) const {
        check(u);
        return adj_[u].count(v) > 0;
    }

    std::vector<std::pair<size_t, size_t>> edges() const {
        std::vector<std::pair<size_t, size_t>> out;
        for (size_t u = 0; u < adj_.size(); u++) {
            for (auto v : adj_[u]) {
                if (u < v) {
                    out.emplace_back(u, v);
                }
            }
        }
        return out;
    }

    /// Vertices with exactly one edge.
    std::vector<size_t> leaves() const {
        std::vector<size_t> out;
        for (size_t v = 0; v < adj_.size(); v++) {
            if (adj_[v].size() == 1) {
                out.push_back(v);
            }
        }
        return out;
    }

    bool connected(size_t u, size_t v) const {
        check(u);
        check(v);
        std::vector<bool> seen(adj_.size(), false);
        std::vector<size_t> stack{u};
        seen[u] = true;
        while (!stack.empty()) {
            size_t x = stack.back();
            stack.pop_back();
            if (x == v) {
                return true;
            }
            for (auto y : adj_[x]) {
                if (!seen[y]) {
                    seen[y] = true;
                    stack.push_back(y);
                }
            }
        }
        return false;
    }

    /// Graph effect of a PBS followed by a Hadamard on `target`: the other
    /// vertex inherits every edge of the target and the target is left as a
    /// leaf hanging off it. Fusing two adjacent vertices (e.g. the two halves
    /// of one Bell pair) is undefined and rejected.
    void fuse(size_t target, size_t other) {
        check(target);
        check(other);
        if (target == other || has_edge(target, other)) {
            throw std::invalid_argument("pbs operation on adjacent vertices is undefined");
        }
        std::vector<size_t> moved(adj_[target].begin(), adj_[target].end());
        for (auto u : moved) {
            remove_edge(target, u);
            add_edge(other, u);
        }
        add_edge(target, other);
        pbs_ops_++;
    }

    /// Number of PBS operations applied to this graph.
    size_t pbs_ops() const {
        return pbs_ops_;
    }

    BetaEquality beta_equality = BetaEquality::None;

   private:
    void check(size_t v) const {
        if (v >= modes_.size()) {
            throw std::invalid_argument("vertex index out of range");
        }
    }

    std::vector<size_t> modes_;
    std::vector<std::set<size_t>> adj_;
    size_t pbs_ops_ = 0;
};

}  // namespace tms

#endif
