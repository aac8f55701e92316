#pragma once

/// @file partition.hpp
/// Node partitions, characteristic matrices, almost-equitable-partition
/// (AEP) tests and coarsest-AEP refinement.
///
/// A partition is an AEP of a graph when, for every pair of distinct cells
/// (X, Y), all nodes of X have the same number of in-neighbours inside Y.
/// Counts toward a node's own cell are unconstrained.

#include <algorithm>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hycon/error.hpp"
#include "hycon/graph.hpp"
#include "hycon/matrix.hpp"
#include "hycon/spectral.hpp"

namespace hycon {

class Partition {
  public:
    Partition() = default;

    /// Cells keep the given order. Throws unless they partition 0..n-1 exactly.
    Partition(std::vector<NodeSet> cells, std::size_t n) : cells_(std::move(cells)), labels_(n, npos) {
        for (std::size_t k = 0; k < cells_.size(); ++k) {
            auto& cell = cells_[k];
            if (cell.empty()) throw InvalidArgument("partition: empty cell");
            std::ranges::sort(cell);
            for (Node v : cell) {
                if (v >= n) {
                    throw InvalidArgument("partition: node " + std::to_string(v) + " out of range for " +
                                          std::to_string(n) + " nodes");
                }
                if (labels_[v] != npos) {
                    throw InvalidArgument("partition: node " + std::to_string(v) + " in more than one cell");
                }
                labels_[v] = k;
            }
        }
        for (Node v = 0; v < n; ++v) {
            if (labels_[v] == npos) throw InvalidArgument("partition: node " + std::to_string(v) + " not covered");
        }
    }

    /// Cell index per node; cells numbered in order of first appearance.
    [[nodiscard]] static Partition from_labels(std::span<const std::size_t> labels) {
        std::map<std::size_t, std::size_t> renumber;
        std::vector<NodeSet> cells;
        for (Node v = 0; v < labels.size(); ++v) {
            auto [it, inserted] = renumber.try_emplace(labels[v], cells.size());
            if (inserted) cells.emplace_back();
            cells[it->second].push_back(v);
        }
        return Partition(std::move(cells), labels.size());
    }

    [[nodiscard]] static Partition trivial(std::size_t n) {
        if (n == 0) return Partition({}, 0);
        NodeSet all(n);
        for (Node v = 0; v < n; ++v) all[v] = v;
        return Partition({all}, n);
    }

    [[nodiscard]] static Partition singletons(std::size_t n) {
        std::vector<NodeSet> cells;
        for (Node v = 0; v < n; ++v) cells.push_back({v});
        return Partition(std::move(cells), n);
    }

    [[nodiscard]] std::size_t size() const noexcept { return labels_.size(); }
    [[nodiscard]] std::size_t num_cells() const noexcept { return cells_.size(); }
    [[nodiscard]] const std::vector<NodeSet>& cells() const noexcept { return cells_; }
    [[nodiscard]] const NodeSet& cell(std::size_t k) const { return cells_.at(k); }
    [[nodiscard]] std::size_t cell_of(Node v) const { return labels_.at(v); }
    [[nodiscard]] const std::vector<std::size_t>& labels() const noexcept { return labels_; }

    /// Same cells ordered by smallest member.
    [[nodiscard]] Partition canonical() const {
        auto cells = cells_;
        std::ranges::sort(cells, [](const NodeSet& a, const NodeSet& b) { return a.front() < b.front(); });
        return Partition(std::move(cells), size());
    }

    /// Equal as set partitions (cell order ignored).
    friend bool operator==(const Partition& a, const Partition& b) {
        return a.size() == b.size() && a.canonical().cells_ == b.canonical().cells_;
    }

  private:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::vector<NodeSet> cells_;
    std::vector<std::size_t> labels_;
};

/// n x r 0/1 matrix with P[v][k] = 1 iff v lies in cell k.
[[nodiscard]] inline IntMatrix characteristic_matrix(const Partition& p) {
    IntMatrix m(p.size(), p.num_cells());
    for (Node v = 0; v < p.size(); ++v) m(v, p.cell_of(v)) = 1;
    return m;
}

[[nodiscard]] inline IntMatrix characteristic_matrix(const Partition& p, std::size_t n) {
    if (p.size() != n) {
        throw InvalidArgument("partition covers " + std::to_string(p.size()) + " nodes, expected " +
                              std::to_string(n));
    }
    return characteristic_matrix(p);
}

/// Why a partition is not almost equitable: nodes `a` and `b` of cell
/// `cell` have different in-neighbour counts inside cell `toward`.
struct AepWitness {
    std::size_t cell = 0;
    std::size_t toward = 0;
    Node a = 0;
    Node b = 0;
    std::size_t count_a = 0;
    std::size_t count_b = 0;
};

struct AepResult {
    bool is_aep = true;
    std::optional<AepWitness> witness;

    explicit operator bool() const noexcept { return is_aep; }
};

namespace detail {

inline void require_same_size(const Digraph& g, const Partition& p) {
    if (g.size() != p.size()) {
        throw InvalidArgument("partition covers " + std::to_string(p.size()) + " nodes, graph has " +
                              std::to_string(g.size()));
    }
}

/// counts[v][k] = number of in-neighbours of v inside cell k.
inline std::vector<std::vector<std::size_t>> cell_counts(const Digraph& g, const std::vector<std::size_t>& labels,
                                                         std::size_t cells) {
    std::vector<std::vector<std::size_t>> counts(g.size(), std::vector<std::size_t>(cells, 0));
    for (const auto& e : g.edges()) ++counts[e.dst][labels[e.src]];
    return counts;
}

}  // namespace detail

[[nodiscard]] inline AepResult is_aep(const Digraph& g, const Partition& p) {
    detail::require_same_size(g, p);
    const auto counts = detail::cell_counts(g, p.labels(), p.num_cells());
    for (std::size_t k = 0; k < p.num_cells(); ++k) {
        const auto& cell = p.cell(k);
        const Node first = cell.front();
        for (Node v : cell) {
            for (std::size_t t = 0; t < p.num_cells(); ++t) {
                if (t == k || counts[v][t] == counts[first][t]) continue;
                return {false, AepWitness{k, t, first, v, counts[first][t], counts[v][t]}};
            }
        }
    }
    return {};
}

/// Exact test of L Im(P) being contained in Im(P) for a 0/1 characteristic
/// matrix P: every column of L*P must be constant on each cell. Works for any
/// square integer matrix, not only Laplacians.
[[nodiscard]] inline bool is_invariant(const IntMatrix& l, const IntMatrix& p) {
    if (!l.is_square() || l.cols() != p.rows()) {
        throw DimensionError("is_invariant: " + l.shape() + " against " + p.shape());
    }
    const std::size_t n = p.rows();
    std::vector<std::size_t> label(n);
    for (std::size_t v = 0; v < n; ++v) {
        std::size_t ones = 0;
        for (std::size_t k = 0; k < p.cols(); ++k) {
            if (p(v, k) == 1) {
                label[v] = k;
                ++ones;
            } else if (p(v, k) != 0) {
                throw InvalidArgument("is_invariant: P has a non-0/1 entry");
            }
        }
        if (ones != 1) throw InvalidArgument("is_invariant: P row " + std::to_string(v) + " is not a unit vector");
    }
    const IntMatrix lp = l * p;
    std::vector<std::size_t> representative(p.cols(), n);
    for (std::size_t v = 0; v < n; ++v) {
        const std::size_t k = label[v];
        if (representative[k] == n) {
            representative[k] = v;
            continue;
        }
        const std::size_t u = representative[k];
        for (std::size_t col = 0; col < p.cols(); ++col)
            if (lp(v, col) != lp(u, col)) return false;
    }
    return true;
}

/// Splits cells of `seed` until the partition is an AEP of every graph in
/// `graphs`. Output cells are grouped by the seed cell they came from, in seed
/// order, and by smallest member inside each group.
[[nodiscard]] inline Partition refine_to_aep(const std::vector<const Digraph*>& graphs, const Partition& seed) {
    for (const auto* g : graphs) detail::require_same_size(*g, seed);
    const std::size_t n = seed.size();
    std::vector<std::size_t> labels = seed.labels();
    std::size_t cells = seed.num_cells();
    for (;;) {
        std::vector<std::vector<std::vector<std::size_t>>> all_counts;
        for (const auto* g : graphs) all_counts.push_back(detail::cell_counts(*g, labels, cells));

        std::map<std::vector<std::size_t>, std::size_t> ids;
        std::vector<std::size_t> next(n);
        for (Node v = 0; v < n; ++v) {
            std::vector<std::size_t> signature{labels[v]};
            for (const auto& counts : all_counts) {
                auto row = counts[v];
                row[labels[v]] = 0;  // own cell is unconstrained
                signature.insert(signature.end(), row.begin(), row.end());
            }
            next[v] = ids.try_emplace(std::move(signature), ids.size()).first->second;
        }
        const bool stable = ids.size() == cells;
        labels = std::move(next);
        cells = ids.size();
        if (stable) break;
    }

    std::vector<NodeSet> out(cells);
    for (Node v = 0; v < n; ++v) out[labels[v]].push_back(v);
    std::ranges::stable_sort(out, [&](const NodeSet& a, const NodeSet& b) {
        const auto sa = seed.cell_of(a.front());
        const auto sb = seed.cell_of(b.front());
        return sa != sb ? sa < sb : a.front() < b.front();
    });
    return Partition(std::move(out), n);
}

/// Coarsest AEP of `g` that refines `seed`, in canonical cell order.
[[nodiscard]] inline Partition coarsest_aep(const Digraph& g, const Partition& seed) {
    return refine_to_aep({&g}, seed).canonical();
}

/// Exclusive parts of `d` followed by one cell holding the common part (if any).
[[nodiscard]] inline Partition reach_seed(const ReachDecomposition& d, std::size_t n) {
    auto cells = d.exclusive_parts;
    if (!d.common.empty()) cells.push_back(d.common);
    return Partition(std::move(cells), n);
}

struct JointAep {
    Partition partition;            ///< exclusive reaches of the union graph first, then common cells
    ReachDecomposition union_reach;
    std::size_t mu = 0;
    /// The common cells' characteristic subspace is invariant under the
    /// common block of the intersection graph's Laplacian.
    bool common_invariant_under_intersection = true;

    [[nodiscard]] std::vector<std::size_t> common_cells() const {
        std::vector<std::size_t> out;
        for (std::size_t k = mu; k < partition.num_cells(); ++k) out.push_back(k);
        return out;
    }
};

/// Coarsest partition that is an AEP of both graphs and refines the union
/// graph's reach structure.
[[nodiscard]] inline JointAep joint_coarsest_aep(const Digraph& flow, const Digraph& jump) {
    const Digraph un = union_graph(flow, jump);
    JointAep out;
    out.union_reach = decompose(un);
    out.mu = out.union_reach.mu();
    out.partition = refine_to_aep({&flow, &jump}, reach_seed(out.union_reach, un.size()));

    const auto& common = out.union_reach.common;
    if (!common.empty()) {
        const IntMatrix l_int = laplacian(intersection_graph(flow, jump));
        const IntMatrix m_int = l_int.select(common, common);
        std::vector<std::size_t> local(un.size(), 0);
        for (std::size_t r = 0; r < common.size(); ++r) local[common[r]] = r;
        IntMatrix p_c(common.size(), out.partition.num_cells() - out.mu);
        for (std::size_t k = out.mu; k < out.partition.num_cells(); ++k)
            for (Node v : out.partition.cell(k)) p_c(local[v], k - out.mu) = 1;
        out.common_invariant_under_intersection = is_invariant(m_int, p_c);
    }
    return out;
}

enum class PartitionOrder { Equal, Finer, Coarser, Incomparable };

[[nodiscard]] inline const char* to_string(PartitionOrder o) {
    switch (o) {
        case PartitionOrder::Equal: return "equal";
        case PartitionOrder::Finer: return "finer";
        case PartitionOrder::Coarser: return "coarser";
        case PartitionOrder::Incomparable: return "incomparable";
    }
    return "?";
}

/// Finer means every cell of `a` lies inside a cell of `b`.
[[nodiscard]] inline PartitionOrder compare(const Partition& a, const Partition& b) {
    if (a.size() != b.size()) {
        throw InvalidArgument("compare: partitions over " + std::to_string(a.size()) + " and " +
                              std::to_string(b.size()) + " nodes");
    }
    auto refines = [](const Partition& x, const Partition& y) {
        for (const auto& cell : x.cells())
            for (Node v : cell)
                if (y.cell_of(v) != y.cell_of(cell.front())) return false;
        return true;
    };
    const bool ab = refines(a, b);
    const bool ba = refines(b, a);
    if (ab && ba) return PartitionOrder::Equal;
    if (ab) return PartitionOrder::Finer;
    if (ba) return PartitionOrder::Coarser;
    return PartitionOrder::Incomparable;
}

/// One line per cell, labels separated by spaces.
inline void write_partition(std::ostream& os, const Partition& p) {
    for (const auto& cell : p.cells()) {
        for (std::size_t k = 0; k < cell.size(); ++k) os << (k ? " " : "") << cell[k];
        os << '\n';
    }
}

/// Reads the one-line-per-cell format; the node count is the number of labels read.
[[nodiscard]] inline Partition parse_partition(std::istream& in) {
    std::vector<NodeSet> cells;
    std::string line;
    std::size_t lineno = 0;
    std::size_t total = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        NodeSet cell;
        std::string tok;
        while (ls >> tok) {
            try {
                std::size_t used = 0;
                const long long v = std::stoll(tok, &used);
                if (used != tok.size() || v < 0) throw std::invalid_argument(tok);
                cell.push_back(static_cast<Node>(v));
            } catch (const std::exception&) {
                throw ParseError("bad node label '" + tok + "'", lineno);
            }
        }
        total += cell.size();
        cells.push_back(std::move(cell));
    }
    try {
        return Partition(std::move(cells), total);
    } catch (const InvalidArgument& e) {
        throw ParseError(e.what(), lineno);
    }
}

[[nodiscard]] inline Partition parse_partition(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_partition(in);
}

}  // namespace hycon
