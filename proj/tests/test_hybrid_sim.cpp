#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "support.hpp"

using namespace hycon;
using namespace hycon::testing;

TEST(PeriodicDomain, JumpTimes) {
    EXPECT_EQ(periodic_domain(1.0, 3.5).jump_times, (std::vector<double>{1.0, 2.0, 3.0}));
    EXPECT_TRUE(periodic_domain(2.0, 1.0).jump_times.empty());
    EXPECT_EQ(periodic_domain(0.5, 1.0).jump_times, (std::vector<double>{0.5, 1.0}));
    const auto d = periodic_domain(0.1, 1.0);
    EXPECT_EQ(d.jump_count(), 10u);
    EXPECT_EQ(d.jump_times.back(), 1.0);
    EXPECT_THROW((void)periodic_domain(0.0, 1.0), InvalidArgument);
    EXPECT_THROW((void)periodic_domain(1.0, -1.0), InvalidArgument);
}

TEST(RandomDomain, DeterministicAndWithinBounds) {
    const auto a = random_domain(0.1, 1.0, 7, 30.0);
    const auto b = random_domain(0.1, 1.0, 7, 30.0);
    EXPECT_EQ(a, b);
    EXPECT_NE(a.jump_times, random_domain(0.1, 1.0, 8, 30.0).jump_times);
    EXPECT_GE(a.jump_count(), 30u);
    EXPECT_LE(a.jump_count(), 300u);
    for (double d : a.dwell_times()) {
        EXPECT_GT(d, 0.1);
        EXPECT_LT(d, 1.0);
    }
    EXPECT_LE(a.jump_times.back(), 30.0);
}

TEST(RandomDomain, JumpCountBounds) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto d = random_domain(0.1, 1.0, seed, 10.0);
        EXPECT_GE(d.jump_count(), 10u);
        EXPECT_LE(d.jump_count(), 99u);
    }
}

TEST(RandomDomain, Errors) {
    EXPECT_THROW((void)random_domain(0.0, 1.0, 1, 10.0), InvalidArgument);
    EXPECT_THROW((void)random_domain(1.0, 1.0, 1, 10.0), InvalidArgument);
    EXPECT_THROW((void)random_domain(0.1, 1.0, 1, 0.0), InvalidArgument);
}

TEST(Simulate, ZeroLaplaciansFreezeTheState) {
    const Vector x0{1.0, -2.0, 3.0};
    const auto traj = simulate(Matrix(3, 3), Matrix(3, 3), 0.5, periodic_domain(0.3, 2.0), x0, 0.05);
    for (const auto& s : traj.samples) EXPECT_EQ(s.x, x0);
}

TEST(Simulate, SingleAgent) {
    const auto traj = simulate(Matrix(1, 1), Matrix(1, 1), 1.0, random_domain(0.1, 0.5, 3, 5.0), Vector{4.0}, 0.1);
    EXPECT_EQ(traj.final_sample().x, Vector{4.0});
    EXPECT_EQ(traj.final_sample().j, traj.domain.jump_count());
}

TEST(Simulate, K2ClosedForm) {
    const Matrix l = real_laplacian(k2());
    const auto traj = simulate(l, l, 0.25, periodic_domain(1.0, 1.0), Vector{0.0, 2.0}, 0.25);
    // Samples: (0,0) (0.25,0) (0.5,0) (0.75,0) (1,0) (1,1)
    ASSERT_EQ(traj.samples.size(), 6u);
    const double e = std::exp(-2.0);
    const auto& pre = traj.samples[4];
    const auto& post = traj.samples[5];
    EXPECT_EQ(pre.t, 1.0);
    EXPECT_EQ(pre.j, 0u);
    EXPECT_EQ(post.t, 1.0);
    EXPECT_EQ(post.j, 1u);
    EXPECT_NEAR(pre.x[0], 1.0 - e, 1e-14);
    EXPECT_NEAR(pre.x[1], 1.0 + e, 1e-14);
    EXPECT_NEAR(post.x[0], 1.0 - 0.5 * e, 1e-14);
    EXPECT_NEAR(post.x[1], 1.0 + 0.5 * e, 1e-14);
}

TEST(Simulate, SampleGridIsGlobal) {
    const Matrix l = real_laplacian(path3());
    const auto traj = simulate(l, l, 0.2, random_domain(0.1, 1.0, 5, 4.0), Vector{1.0, 0.0, -1.0}, 0.1);
    double prev_t = -1.0;
    std::size_t prev_j = 0;
    for (const auto& s : traj.samples) {
        EXPECT_GE(s.t, prev_t);
        EXPECT_GE(s.j, prev_j);
        if (s.t == prev_t) {
            EXPECT_EQ(s.j, prev_j + 1);
        }
        const bool on_grid = std::abs(s.t / 0.1 - std::round(s.t / 0.1)) < 1e-9;
        const bool at_jump = std::ranges::find(traj.domain.jump_times, s.t) != traj.domain.jump_times.end();
        EXPECT_TRUE(on_grid || at_jump || s.t == 0.0 || s.t == 4.0) << s.t;
        prev_t = s.t;
        prev_j = s.j;
    }
    EXPECT_EQ(traj.final_sample().t, 4.0);
}

TEST(Simulate, FlowOnlyMatchesMatrixExponential) {
    std::mt19937_64 rng(23);
    for (int k = 0; k < 20; ++k) {
        const auto pair = random_pair(rng, 2, 7);
        const Matrix lf = real_laplacian(pair.flow);
        const Vector x0 = random_state(rng, lf.rows());
        const double horizon = uniform(rng, 0.5, 3.0);
        // A period longer than the horizon yields no jumps.
        const auto traj = simulate(lf, real_laplacian(pair.jump), 0.1, periodic_domain(10.0, horizon), x0, 0.1);
        ASSERT_EQ(traj.domain.jump_count(), 0u);
        for (const auto& s : traj.samples) {
            const Vector expected = expm(-lf * s.t) * x0;
            for (std::size_t i = 0; i < x0.size(); ++i) EXPECT_NEAR(s.x[i], expected[i], 1e-12);
        }
    }
}

TEST(Simulate, SemigroupAcrossJumps) {
    // Restarting from the state at a jump reproduces the remaining trajectory.
    std::mt19937_64 rng(29);
    for (int k = 0; k < 10; ++k) {
        const auto pair = random_pair(rng, 2, 7);
        const Matrix lf = real_laplacian(pair.flow);
        const Matrix lj = real_laplacian(pair.jump);
        const auto full = simulate(lf, lj, 0.1, periodic_domain(0.5, 3.0), random_state(rng, lf.rows()), 0.5);
        const Sample* mid = nullptr;
        for (const auto& s : full.samples)
            if (s.t == 1.5 && s.j == 3) mid = &s;
        ASSERT_NE(mid, nullptr);
        const auto tail = simulate(lf, lj, 0.1, periodic_domain(0.5, 1.5), mid->x, 0.5);
        const auto& a = full.final_sample().x;
        const auto& b = tail.final_sample().x;
        for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
    }
}

TEST(Simulate, Errors) {
    const Matrix l = real_laplacian(k2());
    const auto d = periodic_domain(1.0, 2.0);
    EXPECT_THROW((void)simulate(l, l, 0.1, d, Vector{1.0}, 0.1), DimensionError);
    EXPECT_THROW((void)simulate(l, Matrix(3, 3), 0.1, d, Vector{1.0, 2.0}, 0.1), DimensionError);
    EXPECT_THROW((void)simulate(l, l, 0.0, d, Vector{1.0, 2.0}, 0.1), InvalidArgument);
    EXPECT_THROW((void)simulate(l, l, 0.1, d, Vector{1.0, 2.0}, 0.0), InvalidArgument);
    EXPECT_THROW((void)simulate(l, l, 0.1, d, Vector{1.0, std::nan("")}, 0.1), InvalidArgument);
}

TEST(Simulate, DivergenceReportsHybridTime) {
    const Matrix jump{{1e200}};
    try {
        (void)simulate_linear(Matrix(1, 1), jump, periodic_domain(1.0, 5.0), Vector{1.0}, 0.5);
        FAIL() << "expected divergence";
    } catch (const DivergenceError& e) {
        EXPECT_EQ(e.t(), 2.0);
        EXPECT_EQ(e.j(), 2u);
    }
}

TEST(CellSpread, Examples) {
    const Partition p({{0, 1}, {2}}, 3);
    EXPECT_EQ(cell_spread(Vector{1.0, 1.0, 5.0}, p), 0.0);
    EXPECT_EQ(cell_spread(Vector{1.0, 3.0, 5.0}, p), 2.0);
    EXPECT_EQ(cell_spread(Vector{1.0, 2.0, 3.0}, Partition::trivial(3)), 2.0);
    EXPECT_THROW((void)cell_spread(Vector{1.0}, p), DimensionError);
}

TEST(TrajectoryCsv, HeaderAndRows) {
    const Matrix l = real_laplacian(k2());
    const auto traj = simulate(l, l, 0.25, periodic_domain(1.0, 1.0), Vector{0.0, 2.0}, 0.5);
    std::ostringstream os;
    write_trajectory_csv(os, traj);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "t,j,x_0,x_1");
    std::getline(in, line);
    EXPECT_EQ(line, "0,0,0,2");
    std::size_t rows = 1;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, traj.samples.size());
}
