#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "support.hpp"

using namespace hycon;
using namespace hycon::testing;

TEST(ParseEdgeList, ReadsHeaderAndEdges) {
    const Digraph g = parse_edge_list("nodes 3\n0 1\n1 2");
    EXPECT_EQ(g.size(), 3u);
    EXPECT_EQ(g.edges(), (std::vector<Edge>{{0, 1}, {1, 2}}));
}

TEST(ParseEdgeList, EdgelessGraph) {
    const Digraph g = parse_edge_list("nodes 2");
    EXPECT_EQ(g.size(), 2u);
    EXPECT_TRUE(g.edges().empty());
}

TEST(ParseEdgeList, CommentsBlankLinesAndDuplicates) {
    const Digraph g = parse_edge_list("# a graph\n\nnodes 3\n  # inner comment\n0 1\n0 1\n\n2 1\n");
    EXPECT_EQ(g.edges(), (std::vector<Edge>{{0, 1}, {2, 1}}));
}

TEST(ParseEdgeList, ErrorsCarryLineNumbers) {
    auto line_of = [](std::string_view text) {
        try {
            (void)parse_edge_list(text);
        } catch (const ParseError& e) {
            return e.line();
        }
        return std::size_t{0};
    };
    EXPECT_EQ(line_of("nodes 2\n0 0"), 2u);       // self-loop
    EXPECT_EQ(line_of("nodes 2\n0 5"), 2u);       // out of range
    EXPECT_EQ(line_of("nodes 2\n0 1\n1"), 3u);    // malformed
    EXPECT_EQ(line_of("nodes 2\n0 1 2"), 2u);     // trailing token
    EXPECT_EQ(line_of("edges 2\n0 1"), 1u);       // bad header
    EXPECT_EQ(line_of("nodes 2\n0 -1"), 2u);      // negative index
    EXPECT_THROW((void)parse_edge_list("# only a comment\n"), ParseError);
}

TEST(ParseEdgeList, RoundTrip) {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 20; ++k) {
        const Digraph g = random_digraph(rng, 6, 0.3);
        std::ostringstream os;
        write_edge_list(os, g);
        EXPECT_EQ(parse_edge_list(os.str()), g);
    }
}

TEST(Digraph, RejectsInvalidEdges) {
    EXPECT_THROW(Digraph(2, {{0, 0}}), InvalidArgument);
    EXPECT_THROW(Digraph(2, {{0, 2}}), InvalidArgument);
}

TEST(Neighbors, InNeighbours) {
    EXPECT_EQ(neighbors(path3(), 1), (NodeSet{0}));
    EXPECT_EQ(neighbors(path3(), 0), (NodeSet{}));
    EXPECT_EQ(neighbors(star3(), 2), (NodeSet{0, 1}));
    EXPECT_THROW((void)neighbors(path3(), 3), InvalidArgument);
}

TEST(ReachableSet, FollowsEdgeDirection) {
    EXPECT_EQ(reachable_set(path3(), 0), (NodeSet{0, 1, 2}));
    EXPECT_EQ(reachable_set(path3(), 2), (NodeSet{2}));
    for (Node v = 0; v < 3; ++v) EXPECT_EQ(reachable_set(cycle3(), v), (NodeSet{0, 1, 2}));
    EXPECT_THROW((void)reachable_set(path3(), 7), InvalidArgument);
}

TEST(Decompose, Star) {
    const auto d = decompose(star3());
    EXPECT_EQ(d.reaches, (std::vector<NodeSet>{{0, 2}, {1, 2}}));
    EXPECT_EQ(d.exclusive_parts, (std::vector<NodeSet>{{0}, {1}}));
    EXPECT_EQ(d.common, (NodeSet{2}));
    EXPECT_EQ(d.mu(), 2u);
    EXPECT_EQ(d.h(), (std::vector<std::size_t>{1, 1}));
    EXPECT_EQ(d.c(), 1u);
}

TEST(Decompose, PathAndIsolatedNodes) {
    const auto p = decompose(path3());
    EXPECT_EQ(p.reaches, (std::vector<NodeSet>{{0, 1, 2}}));
    EXPECT_TRUE(p.common.empty());
    const auto iso = decompose(Digraph(2, {}));
    EXPECT_EQ(iso.reaches, (std::vector<NodeSet>{{0}, {1}}));
    EXPECT_TRUE(iso.common.empty());
}

TEST(Decompose, PropertiesOnRandomGraphs) {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 300; ++k) {
        const std::size_t n = uniform_int(rng, 1, 9);
        const Digraph g = random_digraph(rng, n, uniform(rng, 0.0, 0.5));
        const auto d = decompose(g);
        ASSERT_GE(d.mu(), 1u);
        std::vector<int> seen(n, 0);
        std::size_t total = d.c();
        for (std::size_t i = 0; i < d.mu(); ++i) {
            EXPECT_FALSE(d.exclusive_parts[i].empty());
            EXPECT_TRUE(std::ranges::includes(d.reaches[i], d.exclusive_parts[i]));
            for (Node v : d.exclusive_parts[i]) ++seen[v];
            total += d.exclusive_parts[i].size();
        }
        for (Node v : d.common) ++seen[v];
        EXPECT_EQ(total, n);
        for (int s : seen) EXPECT_EQ(s, 1);
        for (Node v = 0; v < n; ++v) EXPECT_TRUE(std::ranges::binary_search(reachable_set(g, v), v));
    }
}

TEST(SetOperations, UnionAndIntersection) {
    const Digraph a(2, {{0, 1}});
    const Digraph b(2, {{1, 0}});
    const Digraph e(2, {});
    EXPECT_EQ(union_graph(a, b).edges(), (std::vector<Edge>{{0, 1}, {1, 0}}));
    EXPECT_EQ(union_graph(a, a), a);
    EXPECT_EQ(union_graph(a, e), a);
    EXPECT_EQ(intersection_graph(Digraph(3, {{0, 1}, {1, 2}}), Digraph(3, {{1, 2}})).edges(),
              (std::vector<Edge>{{1, 2}}));
    EXPECT_EQ(intersection_graph(a, a), a);
    EXPECT_TRUE(intersection_graph(a, b).edges().empty());
    EXPECT_THROW((void)union_graph(a, Digraph(3, {})), DimensionError);
    EXPECT_THROW((void)intersection_graph(a, Digraph(3, {})), DimensionError);
}

TEST(SetOperations, CommutativeAndAssociative) {
    std::mt19937_64 rng(8);
    for (int k = 0; k < 50; ++k) {
        const auto a = random_digraph(rng, 5, 0.3);
        const auto b = random_digraph(rng, 5, 0.3);
        const auto c = random_digraph(rng, 5, 0.3);
        EXPECT_EQ(union_graph(a, b), union_graph(b, a));
        EXPECT_EQ(intersection_graph(a, b), intersection_graph(b, a));
        EXPECT_EQ(union_graph(union_graph(a, b), c), union_graph(a, union_graph(b, c)));
        EXPECT_EQ(intersection_graph(intersection_graph(a, b), c), intersection_graph(a, intersection_graph(b, c)));
    }
}

TEST(CanonicalOrdering, ExclusivePartsThenCommon) {
    EXPECT_EQ(canonical_ordering(star3()), (std::vector<Node>{0, 1, 2}));
    EXPECT_EQ(canonical_ordering(path3()), (std::vector<Node>{0, 1, 2}));
    EXPECT_EQ(canonical_ordering(Digraph(3, {{2, 0}, {1, 0}})), (std::vector<Node>{1, 2, 0}));
}

TEST(CanonicalOrdering, PermutedLaplacianIsBlockLowerTriangular) {
    std::mt19937_64 rng(21);
    for (int k = 0; k < 200; ++k) {
        const Digraph g = random_digraph(rng, uniform_int(rng, 1, 8), uniform(rng, 0.05, 0.4));
        const auto d = decompose(g);
        const auto order = canonical_ordering(d);
        const IntMatrix l = laplacian(g).select(order, order);
        std::size_t offset = 0;
        for (const auto& part : d.exclusive_parts) {
            for (std::size_t r = offset; r < offset + part.size(); ++r)
                for (std::size_t c = 0; c < g.size(); ++c)
                    if (c < offset || c >= offset + part.size()) {
                        EXPECT_EQ(l(r, c), 0);
                    }
            offset += part.size();
        }
    }
}
