#pragma once

// Random instance generators and brute-force oracles shared by the unit and
// acceptance tests.

#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hycon/hycon.hpp"

namespace hycon::testing {

/// Uniform double in [lo, hi).
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + static_cast<double>(rng() >> 11) * 0x1.0p-53 * (hi - lo);
}

inline std::size_t uniform_int(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
}

/// Each ordered pair (u, v), u != v, is an edge with probability p.
inline Digraph random_digraph(std::mt19937_64& rng, std::size_t n, double p) {
    std::vector<Edge> edges;
    for (Node u = 0; u < n; ++u)
        for (Node v = 0; v < n; ++v)
            if (u != v && uniform(rng, 0.0, 1.0) < p) edges.push_back({u, v});
    return Digraph(n, std::move(edges));
}

struct GraphPair {
    Digraph flow;
    Digraph jump;
};

/// n uniform in [n_lo, n_hi], one edge probability per graph uniform in [0.15, 0.5].
inline GraphPair random_pair(std::mt19937_64& rng, std::size_t n_lo, std::size_t n_hi) {
    const std::size_t n = uniform_int(rng, n_lo, n_hi);
    const double pf = uniform(rng, 0.15, 0.5);
    const double pj = uniform(rng, 0.15, 0.5);
    auto flow = random_digraph(rng, n, pf);
    auto jump = random_digraph(rng, n, pj);
    return {std::move(flow), std::move(jump)};
}

/// Calls f on every set partition of {0..n-1} (restricted growth strings).
inline void for_each_partition(std::size_t n, const std::function<void(const Partition&)>& f) {
    if (n == 0) {
        f(Partition::trivial(0));
        return;
    }
    std::vector<std::size_t> a(n, 0);
    std::vector<std::size_t> maxv(n, 0);
    for (;;) {
        f(Partition::from_labels(a));
        std::size_t i = n - 1;
        while (i > 0 && a[i] == maxv[i - 1] + 1) --i;
        if (i == 0) return;
        ++a[i];
        maxv[i] = std::max(maxv[i - 1], a[i]);
        for (std::size_t k = i + 1; k < n; ++k) {
            a[k] = 0;
            maxv[k] = maxv[i];
        }
    }
}

inline std::vector<Partition> all_partitions(std::size_t n) {
    std::vector<Partition> out;
    for_each_partition(n, [&](const Partition& p) { out.push_back(p); });
    return out;
}

inline bool refines(const Partition& a, const Partition& b) {
    const auto o = compare(a, b);
    return o == PartitionOrder::Equal || o == PartitionOrder::Finer;
}

struct OracleResult {
    std::vector<Partition> maxima;  ///< all maximal AEPs below the seed
    [[nodiscard]] bool unique() const { return maxima.size() == 1; }
};

/// Brute force: maximal partitions that refine `seed` and are AEPs of every graph.
inline OracleResult brute_force_coarsest(const std::vector<const Digraph*>& graphs, const Partition& seed) {
    std::vector<Partition> candidates;
    for_each_partition(seed.size(), [&](const Partition& p) {
        if (!refines(p, seed)) return;
        for (const auto* g : graphs)
            if (!is_aep(*g, p)) return;
        candidates.push_back(p);
    });
    OracleResult r;
    for (const auto& p : candidates) {
        bool dominated = false;
        for (const auto& q : candidates) {
            if (compare(p, q) == PartitionOrder::Finer) {
                dominated = true;
                break;
            }
        }
        if (!dominated) r.maxima.push_back(p);
    }
    return r;
}

inline Vector random_state(std::mt19937_64& rng, std::size_t n, double lo = -5.0, double hi = 5.0) {
    Vector x(n);
    for (auto& v : x) v = uniform(rng, lo, hi);
    return x;
}

/// x constant on each cell of p, cell values drawn at random.
inline Vector random_cell_constant_state(std::mt19937_64& rng, const Partition& p) {
    Vector x(p.size());
    for (const auto& cell : p.cells()) {
        const double v = uniform(rng, -5.0, 5.0);
        for (Node u : cell) x[u] = v;
    }
    return x;
}

inline Digraph load_example(int id, const char* kind) {
    const std::string path = std::string(HYCON_DATA_DIR) + "/examples/ex" + std::to_string(id) + "_" + kind + ".txt";
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    return parse_edge_list(in);
}

inline Digraph path3() { return Digraph(3, {{0, 1}, {1, 2}}); }
inline Digraph star3() { return Digraph(3, {{0, 2}, {1, 2}}); }
inline Digraph cycle3() { return Digraph(3, {{0, 1}, {1, 2}, {2, 0}}); }
inline Digraph k2() { return Digraph(2, {{0, 1}, {1, 0}}); }

}  // namespace hycon::testing
