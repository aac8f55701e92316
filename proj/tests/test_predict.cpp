#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace hycon;
using namespace hycon::testing;

namespace {

Vector indexed_state(std::size_t n) {
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(i + 1);
    return x;
}

ConsensusReport predict_example(int id, double alpha = 0.2) {
    return predict(load_example(id, "flow"), load_example(id, "jump"), alpha, indexed_state(7));
}

}  // namespace

TEST(WeightedLaplacian, Combination) {
    const Matrix lf = real_laplacian(path3());
    const Matrix lj = real_laplacian(star3());
    EXPECT_EQ(weighted_laplacian(lf, lj, 0.5), lf + 0.5 * lj);
    EXPECT_EQ(weighted_laplacian(lf, Matrix(3, 3), 2.0), lf);
    EXPECT_THROW((void)weighted_laplacian(lf, Matrix(2, 2), 0.5), DimensionError);
    EXPECT_THROW((void)weighted_laplacian(lf, lj, 0.0), InvalidArgument);
}

TEST(ReducedDynamics, StarCommonNode) {
    const Matrix lf = real_laplacian(star3());
    const Matrix lj = real_laplacian(Digraph(3, {{0, 2}}));
    const auto r = reduced_common_dynamics(lf, lj, 0.5, decompose(star3()));
    EXPECT_EQ(r.common_nodes, (NodeSet{2}));
    EXPECT_EQ(r.exclusive_nodes, (std::vector<Node>{0, 1}));
    EXPECT_EQ(r.a_c, (Matrix{{-2.0}}));
    EXPECT_EQ(r.b_c, (Matrix{{1.0, 1.0}}));
    EXPECT_EQ(r.a_d, (Matrix{{0.5}}));
    EXPECT_EQ(r.b_d, (Matrix{{0.5, 0.0}}));
    EXPECT_THROW((void)reduced_common_dynamics(lf, lj, 0.5, decompose(path3())), InvalidArgument);
}

TEST(Predict, ExampleOneSingleReach) {
    const auto rep = predict_example(1);
    EXPECT_EQ(rep.mu, 1u);
    ASSERT_EQ(rep.reaches.size(), 1u);
    EXPECT_TRUE(rep.common.empty());
    EXPECT_FALSE(rep.common_kind);
    EXPECT_NEAR(rep.reaches[0].value, 4.0, 1e-12);
    EXPECT_TRUE(rep.reaches[0].timing_invariant);
}

TEST(Predict, ExampleTwoHybridArc) {
    const auto rep = predict_example(2);
    ASSERT_EQ(rep.reaches.size(), 2u);
    EXPECT_EQ(rep.reaches[0].nodes, (NodeSet{0, 1, 2}));
    EXPECT_NEAR(rep.reaches[0].value, 107.0 / 41.0, 1e-12);
    EXPECT_NEAR(rep.reaches[1].value, 4.5, 1e-12);
    const Vector v1{5.0 / 41.0, 6.0 / 41.0, 30.0 / 41.0};
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(rep.reaches[0].left_eigvec[i], v1[i], 1e-12);
    EXPECT_FALSE(rep.reaches[0].timing_invariant);
    EXPECT_TRUE(rep.reaches[1].timing_invariant);
    EXPECT_EQ(rep.common, (NodeSet{5, 6}));
    EXPECT_FALSE(rep.common_is_constant());
    ASSERT_TRUE(rep.common_kind);
    const auto& arc = std::get<HybridArcCommon>(*rep.common_kind).dynamics;
    EXPECT_EQ(arc.a_c, (Matrix{{-3.0, 1.0}, {1.0, -3.0}}));
    EXPECT_LT(max_abs_diff(arc.a_d, 0.8 * Matrix::identity(2)), 1e-15);
    // Both gamma vectors are multiples of the ones vector, so their span is
    // invariant; the zero eigenvectors of the separate Laplacians are not.
    EXPECT_TRUE(rep.gamma_span_invariant);
    EXPECT_FALSE(rep.common_exact);
    EXPECT_FALSE(rep.warnings.empty());
}

TEST(Predict, ExampleThreeConstantCommon) {
    const auto rep = predict_example(3);
    ASSERT_EQ(rep.reaches.size(), 2u);
    EXPECT_NEAR(rep.reaches[0].value, 2.0, 1e-12);
    EXPECT_NEAR(rep.reaches[1].value, 4.5, 1e-12);
    ASSERT_EQ(rep.gammas.size(), 2u);
    for (const auto& g : rep.gammas)
        for (double v : g) EXPECT_NEAR(v, 0.5, 1e-12);
    EXPECT_TRUE(rep.gamma_span_invariant);
    EXPECT_TRUE(rep.gamma_rank_exact);
    EXPECT_TRUE(rep.common_exact);
    ASSERT_TRUE(rep.common_is_constant());
    const auto& cc = std::get<ConstantCommon>(*rep.common_kind);
    for (double v : cc.node_values) EXPECT_NEAR(v, 3.25, 1e-12);
    ASSERT_EQ(cc.cell_values.size(), 1u);
    EXPECT_NEAR(cc.cell_values[0], 3.25, 1e-12);
}

TEST(Predict, EdgelessJumpGraphUsesFlowOnly) {
    std::mt19937_64 rng(37);
    for (int k = 0; k < 30; ++k) {
        const auto g = random_digraph(rng, uniform_int(rng, 2, 7), uniform(rng, 0.15, 0.5));
        const Digraph none(g.size(), {});
        const Vector x0 = random_state(rng, g.size());
        const auto rep = predict(g, none, 0.3, x0);
        const auto d = decompose(g);
        ASSERT_EQ(rep.mu, d.mu());
        const auto dec = block_decompose(real_laplacian(g), d);
        for (std::size_t i = 0; i < d.mu(); ++i) {
            double expected = 0.0;
            for (std::size_t r = 0; r < d.exclusive_parts[i].size(); ++r)
                expected += dec.left_null[i][r] * x0[d.exclusive_parts[i][r]];
            EXPECT_NEAR(rep.reaches[i].value, expected, 1e-10);
            EXPECT_TRUE(rep.reaches[i].timing_invariant);
        }
        if (!rep.common.empty()) {
            EXPECT_TRUE(rep.common_is_constant());
        }
    }
}

TEST(Predict, PredictedStateIsAnEquilibriumOfWeightedLaplacian) {
    std::mt19937_64 rng(47);
    for (int k = 0; k < 60; ++k) {
        const auto pair = random_pair(rng, 2, 8);
        const Vector x0 = random_state(rng, pair.flow.size());
        const auto rep = predict(pair.flow, pair.jump, 0.1, x0);
        if (!rep.common.empty() && !rep.common_is_constant()) continue;
        Vector z(rep.n, 0.0);
        for (const auto& r : rep.reaches)
            for (Node v : r.nodes) z[v] = r.value;
        if (rep.common_is_constant()) {
            const auto& cc = std::get<ConstantCommon>(*rep.common_kind);
            for (std::size_t r = 0; r < rep.common.size(); ++r) z[rep.common[r]] = cc.node_values[r];
        }
        for (const Matrix& l : {real_laplacian(pair.flow), real_laplacian(pair.jump)}) {
            const Vector lz = l * z;
            for (Node v : rep.common) EXPECT_NEAR(lz[v], 0.0, 1e-9);
        }
        const Vector lz = weighted_laplacian(real_laplacian(pair.flow), real_laplacian(pair.jump), 0.1) * z;
        for (double v : lz) EXPECT_NEAR(v, 0.0, 1e-9);
    }
}

TEST(Predict, Errors) {
    EXPECT_THROW((void)predict(path3(), k2(), 0.1, Vector(3)), DimensionError);
    EXPECT_THROW((void)predict(path3(), path3(), 0.1, Vector(2)), DimensionError);
    EXPECT_THROW((void)predict(path3(), path3(), 0.0, Vector(3)), InvalidArgument);
}

TEST(Predict, WarnsAboveConvergenceBound) {
    const auto rep = predict(k2(), k2(), 0.6, Vector{0.0, 1.0});
    EXPECT_FALSE(rep.warnings.empty());
    EXPECT_TRUE(predict(k2(), k2(), 0.2, Vector{0.0, 1.0}).warnings.empty());
}

TEST(Rationalize, ContinuedFractions) {
    using detail::rationalize;
    EXPECT_EQ(*rationalize(0.5, 1'000'000), detail::Rational(1, 2));
    EXPECT_EQ(*rationalize(-107.0 / 41.0, 1'000'000), detail::Rational(-107, 41));
    EXPECT_FALSE(rationalize(std::sqrt(2.0), 1000));
}

TEST(Verify, OnSubspaceInitialStatePassesTightly) {
    // A state already at the predicted equilibrium stays there.
    const auto rep0 = predict_example(3);
    Vector x0(7);
    for (const auto& r : rep0.reaches)
        for (Node v : r.nodes) x0[v] = r.value;
    for (Node v : rep0.common) x0[v] = 3.25;
    const auto rep = predict(load_example(3, "flow"), load_example(3, "jump"), 0.2, x0);
    const auto traj = simulate(real_laplacian(load_example(3, "flow")), real_laplacian(load_example(3, "jump")), 0.2,
                               random_domain(0.1, 1.0, 1, 10.0), x0, 0.01);
    const auto rec = verify(traj, rep, 1e-9);
    EXPECT_TRUE(rec.passed());
    EXPECT_FALSE(rec.check("common_arc").applicable);
    EXPECT_THROW((void)rec.check("nope"), InvalidArgument);
}

TEST(Verify, ExampleThreeConverges) {
    const auto rep = predict_example(3);
    const auto traj = simulate(real_laplacian(load_example(3, "flow")), real_laplacian(load_example(3, "jump")), 0.2,
                               random_domain(0.1, 1.0, 1, 30.0), rep.x0, 0.01);
    const auto rec = verify(traj, rep, 1e-3);
    EXPECT_TRUE(rec.passed());
}

TEST(Verify, PerturbedPredictionFails) {
    auto rep = predict_example(3);
    const auto traj = simulate(real_laplacian(load_example(3, "flow")), real_laplacian(load_example(3, "jump")), 0.2,
                               random_domain(0.1, 1.0, 1, 30.0), rep.x0, 0.01);
    rep.reaches[1].value += 0.1;
    const auto rec = verify(traj, rep, 1e-3);
    EXPECT_FALSE(rec.passed());
    EXPECT_FALSE(rec.check("reach_2").passed);
    EXPECT_TRUE(rec.check("reach_1").passed);
}

TEST(Verify, HybridArcTracksReducedReferenceWhenReachesAreTimingInvariant) {
    // Reach values that do not depend on the dwell times make the frozen-input
    // reference exact in the limit.
    const Digraph flow(4, {{0, 2}, {1, 2}, {2, 3}});
    const Digraph jump(4, {{0, 3}});
    const Vector x0{1.0, 3.0, 0.0, -2.0};
    const auto rep = predict(flow, jump, 0.2, x0);
    for (const auto& r : rep.reaches) ASSERT_TRUE(r.timing_invariant);
    ASSERT_FALSE(rep.common_is_constant());
    const auto traj = simulate(real_laplacian(flow), real_laplacian(jump), 0.2, random_domain(0.1, 1.0, 4, 30.0), x0,
                               0.01);
    const auto rec = verify(traj, rep, 1e-6);
    EXPECT_TRUE(rec.check("common_arc").applicable);
    EXPECT_TRUE(rec.passed()) << rec.check("common_arc").error;
}

TEST(Verify, MismatchedDimensions) {
    const auto rep = predict(k2(), k2(), 0.2, Vector{0.0, 1.0});
    const auto traj = simulate(real_laplacian(path3()), real_laplacian(path3()), 0.2, periodic_domain(1.0, 2.0),
                               Vector{0.0, 1.0, 2.0}, 0.1);
    EXPECT_THROW((void)verify(traj, rep, 1e-3), DimensionError);
}
