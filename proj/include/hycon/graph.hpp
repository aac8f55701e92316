#pragma once

/// @file graph.hpp
/// Directed communication graphs and their reach structure.
///
/// An edge (u, v) means information flows u -> v, so u is an in-neighbour of v
/// and appears in v's Laplacian row. Nodes are dense labels 0..n-1.

#include <algorithm>
#include <cstddef>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hycon/error.hpp"

namespace hycon {

using Node = std::size_t;
/// Sorted, duplicate-free list of node labels.
using NodeSet = std::vector<Node>;

struct Edge {
    Node src;
    Node dst;

    friend auto operator<=>(const Edge&, const Edge&) = default;
};

class Digraph {
  public:
    Digraph() = default;

    /// Duplicate edges collapse; self-loops and out-of-range endpoints throw.
    Digraph(std::size_t n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
        for (const auto& e : edges_) {
            if (e.src >= n_ || e.dst >= n_) {
                throw InvalidArgument("edge (" + std::to_string(e.src) + "," + std::to_string(e.dst) +
                                      ") out of range for " + std::to_string(n_) + " nodes");
            }
            if (e.src == e.dst) {
                throw InvalidArgument("self-loop at node " + std::to_string(e.src));
            }
        }
        std::ranges::sort(edges_);
        edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
        in_.assign(n_, {});
        out_.assign(n_, {});
        for (const auto& e : edges_) {
            in_[e.dst].push_back(e.src);
            out_[e.src].push_back(e.dst);
        }
        for (auto& l : in_) std::ranges::sort(l);
        for (auto& l : out_) std::ranges::sort(l);
    }

    [[nodiscard]] std::size_t size() const noexcept { return n_; }
    [[nodiscard]] const std::vector<Edge>& edges() const noexcept { return edges_; }

    [[nodiscard]] bool has_edge(Node src, Node dst) const {
        return std::ranges::binary_search(edges_, Edge{src, dst});
    }

    /// In-neighbours of v (nodes u with an edge u -> v).
    [[nodiscard]] const NodeSet& in_neighbors(Node v) const {
        check_node(v);
        return in_[v];
    }
    [[nodiscard]] const NodeSet& out_neighbors(Node v) const {
        check_node(v);
        return out_[v];
    }
    [[nodiscard]] std::size_t in_degree(Node v) const { return in_neighbors(v).size(); }

    void check_node(Node v) const {
        if (v >= n_) {
            throw InvalidArgument("node " + std::to_string(v) + " out of range for " + std::to_string(n_) +
                                  " nodes");
        }
    }

    friend bool operator==(const Digraph& a, const Digraph& b) {
        return a.n_ == b.n_ && a.edges_ == b.edges_;
    }

  private:
    std::size_t n_ = 0;
    std::vector<Edge> edges_;
    std::vector<NodeSet> in_;
    std::vector<NodeSet> out_;
};

/// Parses the edge-list format: first non-comment line "nodes <n>", then
/// "<src> <dst>" per line; '#' starts a comment line; blank lines are ignored.
[[nodiscard]] inline Digraph parse_edge_list(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    std::size_t n = 0;
    bool have_header = false;
    std::vector<Edge> edges;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        if (!have_header) {
            std::string kw;
            long long count = -1;
            std::string extra;
            if (!(ls >> kw >> count) || kw != "nodes" || count < 0 || (ls >> extra)) {
                throw ParseError("expected 'nodes <n>'", lineno);
            }
            n = static_cast<std::size_t>(count);
            have_header = true;
            continue;
        }
        long long src = -1;
        long long dst = -1;
        std::string extra;
        if (!(ls >> src >> dst) || (ls >> extra)) {
            throw ParseError("expected '<src> <dst>'", lineno);
        }
        if (src < 0 || dst < 0 || static_cast<std::size_t>(src) >= n || static_cast<std::size_t>(dst) >= n) {
            throw ParseError("node index out of range (nodes " + std::to_string(n) + ")", lineno);
        }
        if (src == dst) {
            throw ParseError("self-loop at node " + std::to_string(src), lineno);
        }
        edges.push_back({static_cast<Node>(src), static_cast<Node>(dst)});
    }
    if (!have_header) {
        throw ParseError("missing 'nodes <n>' header", lineno);
    }
    return Digraph(n, std::move(edges));
}

[[nodiscard]] inline Digraph parse_edge_list(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_edge_list(in);
}

inline void write_edge_list(std::ostream& os, const Digraph& g) {
    os << "nodes " << g.size() << '\n';
    for (const auto& e : g.edges()) os << e.src << ' ' << e.dst << '\n';
}

[[nodiscard]] inline NodeSet neighbors(const Digraph& g, Node v) { return g.in_neighbors(v); }

/// v together with every node reachable from v along edge direction.
[[nodiscard]] inline NodeSet reachable_set(const Digraph& g, Node v) {
    g.check_node(v);
    std::vector<bool> seen(g.size(), false);
    std::vector<Node> stack{v};
    seen[v] = true;
    while (!stack.empty()) {
        const Node u = stack.back();
        stack.pop_back();
        for (Node w : g.out_neighbors(u)) {
            if (!seen[w]) {
                seen[w] = true;
                stack.push_back(w);
            }
        }
    }
    NodeSet out;
    for (Node u = 0; u < g.size(); ++u)
        if (seen[u]) out.push_back(u);
    return out;
}

struct ReachDecomposition {
    std::vector<NodeSet> reaches;
    std::vector<NodeSet> exclusive_parts;
    NodeSet common;

    [[nodiscard]] std::size_t mu() const noexcept { return reaches.size(); }
    [[nodiscard]] std::size_t c() const noexcept { return common.size(); }
    [[nodiscard]] std::vector<std::size_t> h() const {
        std::vector<std::size_t> out;
        for (const auto& part : exclusive_parts) out.push_back(part.size());
        return out;
    }
};

/// Reaches are the maximal reachable sets. They are ordered by the smallest
/// label of their exclusive part, which is never empty because a reach's roots
/// belong to no other reach.
[[nodiscard]] inline ReachDecomposition decompose(const Digraph& g) {
    const std::size_t n = g.size();
    std::vector<NodeSet> sets;
    for (Node v = 0; v < n; ++v) sets.push_back(reachable_set(g, v));
    std::ranges::sort(sets);
    sets.erase(std::unique(sets.begin(), sets.end()), sets.end());

    std::vector<NodeSet> maximal;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        bool contained = false;
        for (std::size_t k = 0; k < sets.size() && !contained; ++k) {
            if (k == i || sets[k].size() <= sets[i].size()) continue;
            contained = std::ranges::includes(sets[k], sets[i]);
        }
        if (!contained) maximal.push_back(sets[i]);
    }

    std::vector<std::size_t> membership(n, 0);
    for (const auto& r : maximal)
        for (Node v : r) ++membership[v];

    ReachDecomposition d;
    std::vector<std::pair<NodeSet, NodeSet>> pairs;
    for (const auto& r : maximal) {
        NodeSet excl;
        for (Node v : r)
            if (membership[v] == 1) excl.push_back(v);
        pairs.emplace_back(excl, r);
    }
    std::ranges::sort(pairs, [](const auto& a, const auto& b) { return a.first.front() < b.first.front(); });
    for (auto& [excl, r] : pairs) {
        d.exclusive_parts.push_back(std::move(excl));
        d.reaches.push_back(std::move(r));
    }
    for (Node v = 0; v < n; ++v)
        if (membership[v] > 1) d.common.push_back(v);
    return d;
}

[[nodiscard]] inline Digraph union_graph(const Digraph& a, const Digraph& b) {
    if (a.size() != b.size()) {
        throw DimensionError("union_graph: node counts differ (" + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()) + ")");
    }
    std::vector<Edge> edges;
    std::ranges::set_union(a.edges(), b.edges(), std::back_inserter(edges));
    return Digraph(a.size(), std::move(edges));
}

[[nodiscard]] inline Digraph intersection_graph(const Digraph& a, const Digraph& b) {
    if (a.size() != b.size()) {
        throw DimensionError("intersection_graph: node counts differ (" + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()) + ")");
    }
    std::vector<Edge> edges;
    std::ranges::set_intersection(a.edges(), b.edges(), std::back_inserter(edges));
    return Digraph(a.size(), std::move(edges));
}

/// Exclusive parts in reach order, then the common part; ascending within each block.
[[nodiscard]] inline std::vector<Node> canonical_ordering(const ReachDecomposition& d) {
    std::vector<Node> order;
    for (const auto& part : d.exclusive_parts) order.insert(order.end(), part.begin(), part.end());
    order.insert(order.end(), d.common.begin(), d.common.end());
    return order;
}

[[nodiscard]] inline std::vector<Node> canonical_ordering(const Digraph& g) {
    return canonical_ordering(decompose(g));
}

}  // namespace hycon
