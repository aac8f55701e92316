#pragma once

/// @file predict.hpp
/// Closed-form multi-consensus prediction from the weighted Laplacian
/// L_f + alpha L_j, the reduced dynamics of the common part, and a checker
/// that compares a simulated trajectory against a prediction.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "hycon/error.hpp"
#include "hycon/gain.hpp"
#include "hycon/graph.hpp"
#include "hycon/hybrid_sim.hpp"
#include "hycon/linalg.hpp"
#include "hycon/matrix.hpp"
#include "hycon/partition.hpp"
#include "hycon/spectral.hpp"

namespace hycon {

[[nodiscard]] inline Matrix weighted_laplacian(const Matrix& l_flow, const Matrix& l_jump, double alpha) {
    if (l_flow.shape() != l_jump.shape()) {
        throw DimensionError("weighted_laplacian: flow " + l_flow.shape() + " vs jump " + l_jump.shape());
    }
    if (!(alpha > 0.0)) throw InvalidArgument("weighted_laplacian: gain must be positive");
    return l_flow + alpha * l_jump;
}

/// Common-part dynamics driven by the exclusive-part states u:
///   flow  x_C' = A_c x_C + B_c u
///   jump  x_C+ = A_d x_C + B_d u
struct ReducedDynamics {
    NodeSet common_nodes;
    std::vector<Node> exclusive_nodes;  ///< column order of B_c and B_d
    Matrix a_c, b_c, a_d, b_d;
};

[[nodiscard]] inline ReducedDynamics reduced_common_dynamics(const Matrix& l_flow, const Matrix& l_jump, double alpha,
                                                             const ReachDecomposition& reach) {
    if (reach.common.empty()) throw InvalidArgument("reduced_common_dynamics: empty common part");
    const std::size_t n = canonical_ordering(reach).size();
    if (l_flow.rows() != n || l_flow.cols() != n || l_jump.shape() != l_flow.shape()) {
        throw DimensionError("reduced_common_dynamics: matrices " + l_flow.shape() + ", " + l_jump.shape() +
                             " vs " + std::to_string(n) + " nodes");
    }
    ReducedDynamics r;
    r.common_nodes = reach.common;
    for (const auto& part : reach.exclusive_parts) r.exclusive_nodes.insert(r.exclusive_nodes.end(), part.begin(), part.end());
    const std::size_t c = r.common_nodes.size();
    r.a_c = -l_flow.select(r.common_nodes, r.common_nodes);
    r.b_c = -l_flow.select(r.common_nodes, r.exclusive_nodes);
    r.a_d = Matrix::identity(c) - alpha * l_jump.select(r.common_nodes, r.common_nodes);
    r.b_d = -alpha * l_jump.select(r.common_nodes, r.exclusive_nodes);
    return r;
}

struct ReachPrediction {
    NodeSet nodes;       ///< exclusive part of the union graph
    Vector left_eigvec;  ///< over `nodes`, nonnegative, sums to 1
    double value = 0.0;
    /// left_eigvec is a left null vector of both the flow and the jump block,
    /// so its weighted average is conserved for every dwell-time sequence.
    bool timing_invariant = false;
};

struct ConstantCommon {
    Vector node_values;  ///< one per common node
    Vector cell_values;  ///< one per common cell of the partition
};

struct HybridArcCommon {
    ReducedDynamics dynamics;
};

struct ConsensusReport {
    std::size_t n = 0;
    double alpha = 0.0;
    GainBounds bounds;
    Vector x0;
    Partition partition;  ///< reach cells first, then common cells
    std::size_t mu = 0;
    bool common_invariant_under_intersection = true;
    std::vector<Node> ordering;
    std::vector<ReachPrediction> reaches;
    NodeSet common;
    std::vector<Vector> gammas;  ///< over `common`
    /// span{gamma^i} is invariant under the flow and jump common blocks.
    bool gamma_span_invariant = false;
    bool gamma_rank_exact = false;  ///< rank decided on rationalized entries
    /// span{z_i} is invariant under both Laplacians, i.e. M_q gamma^i + M_{q,i} 1 = 0
    /// for q = flow, jump. Then sum_i gamma^i x_i^ss is a fixed point of both
    /// the flow and the jump, and the common part settles to constants.
    bool common_exact = false;
    std::optional<std::variant<ConstantCommon, HybridArcCommon>> common_kind;
    std::optional<ReducedDynamics> reduced;
    std::vector<std::string> warnings;

    [[nodiscard]] bool common_is_constant() const {
        return common_kind && std::holds_alternative<ConstantCommon>(*common_kind);
    }

    /// Reach value per exclusive node, in `reduced->exclusive_nodes` order.
    [[nodiscard]] Vector reach_inputs() const {
        Vector u;
        for (const auto& r : reaches) u.insert(u.end(), r.nodes.size(), r.value);
        return u;
    }
};

namespace detail {

using Rational = boost::multiprecision::cpp_rational;

/// Continued-fraction reconstruction p/q of x with q <= max_den, accepted only
/// if it reproduces x to a relative 1e-10.
inline std::optional<Rational> rationalize(double x, std::int64_t max_den) {
    if (!std::isfinite(x)) return std::nullopt;
    const double tol = 1e-10 * std::max(1.0, std::abs(x));
    const double ax = std::abs(x);
    if (ax > 1e12) return std::nullopt;
    long double r = ax;
    std::int64_t p_prev = 1, p_prev2 = 0, q_prev = 0, q_prev2 = 1;
    for (int it = 0; it < 64; ++it) {
        const long double a_ld = std::floor(r);
        if (a_ld > 1e15L) break;
        const auto a = static_cast<std::int64_t>(a_ld);
        const std::int64_t p = a * p_prev + p_prev2;
        const std::int64_t q = a * q_prev + q_prev2;
        if (q > max_den) break;
        if (std::abs(static_cast<double>(p) / static_cast<double>(q) - ax) <= tol) {
            Rational out(p, q);
            return x < 0 ? Rational(-out) : out;
        }
        p_prev2 = p_prev;
        p_prev = p;
        q_prev2 = q_prev;
        q_prev = q;
        const long double frac = r - a_ld;
        if (frac < 1e-18L) break;
        r = 1.0L / frac;
    }
    return std::nullopt;
}

inline std::size_t exact_rank(std::vector<std::vector<Rational>> a) {
    const std::size_t rows = a.size();
    const std::size_t cols = rows ? a.front().size() : 0;
    std::size_t rank = 0;
    for (std::size_t c = 0; c < cols && rank < rows; ++c) {
        std::size_t pivot = rank;
        while (pivot < rows && a[pivot][c] == 0) ++pivot;
        if (pivot == rows) continue;
        std::swap(a[pivot], a[rank]);
        for (std::size_t r = rank + 1; r < rows; ++r) {
            if (a[r][c] == 0) continue;
            const Rational f = a[r][c] / a[rank][c];
            for (std::size_t k = c; k < cols; ++k) a[r][k] -= f * a[rank][k];
        }
        ++rank;
    }
    return rank;
}

/// Whether span(columns of g) is invariant under each matrix in `ms`.
/// Returns {invariant, decided_exactly}.
inline std::pair<bool, bool> span_invariant(const Matrix& g, const std::vector<Matrix>& ms) {
    const std::size_t c = g.rows();
    const std::size_t k = g.cols();
    std::vector<std::vector<Rational>> gr(c, std::vector<Rational>(k));
    bool exact = true;
    for (std::size_t r = 0; r < c && exact; ++r)
        for (std::size_t s = 0; s < k && exact; ++s) {
            auto q = rationalize(g(r, s), 1'000'000);
            if (q) gr[r][s] = *q;
            else exact = false;
        }
    for (const auto& m : ms)
        for (double v : m.data())
            if (exact && !rationalize(v, 1'000'000)) exact = false;

    if (exact) {
        const std::size_t base = exact_rank(gr);
        for (const auto& m : ms) {
            auto aug = gr;
            for (std::size_t r = 0; r < c; ++r) {
                for (std::size_t s = 0; s < k; ++s) {
                    Rational acc = 0;
                    for (std::size_t t = 0; t < c; ++t) {
                        if (m(r, t) != 0.0) acc += *rationalize(m(r, t), 1'000'000) * gr[t][s];
                    }
                    aug[r].push_back(acc);
                }
            }
            if (exact_rank(std::move(aug)) != base) return {false, true};
        }
        return {true, true};
    }

    const std::size_t base = numerical_rank(g);
    for (const auto& m : ms) {
        const Matrix mg = m * g;
        Matrix aug(c, 2 * k);
        aug.set_block(0, 0, g);
        aug.set_block(0, k, mg);
        if (numerical_rank(aug) != base) return {false, false};
    }
    return {true, false};
}

}  // namespace detail

/// Predicts clusters and steady-state values for the hybrid network with
/// flow graph `flow`, jump graph `jump`, gain `alpha` and initial state `x0`.
[[nodiscard]] inline ConsensusReport predict(const Digraph& flow, const Digraph& jump, double alpha,
                                             std::span<const double> x0) {
    if (flow.size() != jump.size()) {
        throw DimensionError("predict: flow graph has " + std::to_string(flow.size()) + " nodes, jump graph " +
                             std::to_string(jump.size()));
    }
    if (x0.size() != flow.size()) {
        throw DimensionError("predict: initial state has length " + std::to_string(x0.size()) + ", expected " +
                             std::to_string(flow.size()));
    }
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("predict: gain must be positive and finite");

    const Matrix l_flow = real_laplacian(flow);
    const Matrix l_jump = real_laplacian(jump);

    ConsensusReport rep;
    rep.n = flow.size();
    rep.alpha = alpha;
    rep.x0.assign(x0.begin(), x0.end());
    rep.bounds = alpha_convergence_bound(l_jump);
    if (alpha >= rep.bounds.alpha_conv) {
        rep.warnings.push_back("gain " + std::to_string(alpha) + " is not below the convergence bound " +
                               std::to_string(rep.bounds.alpha_conv));
    } else if (alpha >= rep.bounds.alpha_nonneg) {
        rep.warnings.push_back("gain " + std::to_string(alpha) +
                               " makes a diagonal entry of the jump map nonpositive");
    }

    const JointAep joint = joint_coarsest_aep(flow, jump);
    rep.partition = joint.partition;
    rep.mu = joint.mu;
    rep.common_invariant_under_intersection = joint.common_invariant_under_intersection;
    if (!joint.common_invariant_under_intersection) {
        rep.warnings.push_back("common cells are not invariant under the intersection graph's common block");
    }

    const ReachDecomposition& reach = joint.union_reach;
    rep.ordering = canonical_ordering(reach);
    rep.common = reach.common;
    const LaplacianDecomposition dec = block_decompose(weighted_laplacian(l_flow, l_jump, alpha), reach);

    for (std::size_t i = 0; i < reach.mu(); ++i) {
        ReachPrediction rp;
        rp.nodes = reach.exclusive_parts[i];
        rp.left_eigvec = dec.left_null[i];
        for (std::size_t k = 0; k < rp.nodes.size(); ++k) rp.value += rp.left_eigvec[k] * x0[rp.nodes[k]];
        auto null_residual = [&](const Matrix& l) {
            const Vector r = left_multiply(rp.left_eigvec, l.select(rp.nodes, rp.nodes));
            double m = 0.0;
            for (double v : r) m = std::max(m, std::abs(v));
            return m;
        };
        rp.timing_invariant = null_residual(l_flow) < 1e-10 && null_residual(l_jump) < 1e-10;
        rep.reaches.push_back(std::move(rp));
    }

    if (rep.common.empty()) return rep;

    rep.gammas = dec.gamma;
    const std::size_t c = rep.common.size();
    Matrix g(c, reach.mu());
    for (std::size_t i = 0; i < reach.mu(); ++i)
        for (std::size_t r = 0; r < c; ++r) g(r, i) = dec.gamma[i][r];

    const Matrix m_flow = l_flow.select(rep.common, rep.common);
    const Matrix m_jump = l_jump.select(rep.common, rep.common);
    const auto [invariant, exact] = detail::span_invariant(g, {m_flow, m_jump});
    rep.gamma_span_invariant = invariant;
    rep.gamma_rank_exact = exact;

    double fixed_residual = 0.0;
    for (const Matrix* l : {&l_flow, &l_jump}) {
        const Matrix m = l->select(rep.common, rep.common);
        for (std::size_t i = 0; i < reach.mu(); ++i) {
            const Matrix mi = l->select(rep.common, reach.exclusive_parts[i]);
            const Vector mg = m * dec.gamma[i];
            for (std::size_t r = 0; r < c; ++r) {
                double s = mg[r];
                for (std::size_t k = 0; k < mi.cols(); ++k) s += mi(r, k);
                fixed_residual = std::max(fixed_residual, std::abs(s));
            }
        }
    }
    rep.common_exact = fixed_residual < 1e-9 * (1.0 + norm_inf(l_flow) + norm_inf(l_jump));
    if (invariant != rep.common_exact) {
        rep.warnings.push_back(std::string("gamma span is ") + (invariant ? "" : "not ") +
                               "invariant under the common blocks but the zero-eigenvector span is " +
                               (rep.common_exact ? "" : "not ") + "invariant under both Laplacians; " +
                               "classified by the latter");
    }

    rep.reduced = reduced_common_dynamics(l_flow, l_jump, alpha, reach);
    if (rep.common_exact) {
        ConstantCommon cc;
        cc.node_values.assign(c, 0.0);
        for (std::size_t i = 0; i < reach.mu(); ++i)
            for (std::size_t r = 0; r < c; ++r) cc.node_values[r] += dec.gamma[i][r] * rep.reaches[i].value;
        std::vector<std::size_t> local(rep.n, 0);
        for (std::size_t r = 0; r < c; ++r) local[rep.common[r]] = r;
        for (std::size_t k = rep.mu; k < rep.partition.num_cells(); ++k) {
            double s = 0.0;
            for (Node v : rep.partition.cell(k)) s += cc.node_values[local[v]];
            cc.cell_values.push_back(s / static_cast<double>(rep.partition.cell(k).size()));
        }
        rep.common_kind = std::move(cc);
    } else {
        rep.common_kind = HybridArcCommon{*rep.reduced};
    }
    return rep;
}

struct VerificationCheck {
    std::string name;
    bool applicable = true;
    bool passed = true;
    double error = 0.0;
};

struct VerificationRecord {
    double tol = 0.0;
    std::size_t first_sample = 0;  ///< start of the checked tail
    std::vector<VerificationCheck> checks;

    [[nodiscard]] bool passed() const {
        return std::ranges::all_of(checks, [](const auto& c) { return !c.applicable || c.passed; });
    }
    [[nodiscard]] const VerificationCheck& check(std::string_view name) const {
        for (const auto& c : checks)
            if (c.name == name) return c;
        throw InvalidArgument("no verification check named '" + std::string(name) + "'");
    }
};

/// Reference trajectory of the common part with reach inputs frozen at their
/// predicted values, on the same time domain and sample grid as `like`.
[[nodiscard]] inline HybridTrajectory reduced_reference(const ConsensusReport& report, const HybridTrajectory& like) {
    if (!report.reduced) throw InvalidArgument("reduced_reference: report has no common part");
    const auto& rd = *report.reduced;
    const std::size_t c = rd.common_nodes.size();
    const Vector u = report.reach_inputs();
    const Vector bc_u = rd.b_c * u;
    const Vector bd_u = rd.b_d * u;
    // Augmented state [x_C; 1] turns the affine input into a linear one.
    Matrix flow(c + 1, c + 1);
    Matrix jump(c + 1, c + 1);
    flow.set_block(0, 0, rd.a_c);
    jump.set_block(0, 0, rd.a_d);
    for (std::size_t r = 0; r < c; ++r) {
        flow(r, c) = bc_u[r];
        jump(r, c) = bd_u[r];
    }
    jump(c, c) = 1.0;
    Vector x0(c + 1, 1.0);
    for (std::size_t r = 0; r < c; ++r) x0[r] = report.x0.at(rd.common_nodes[r]);
    return simulate_linear(flow, jump, like.domain, x0, like.sample_dt);
}

/// Checks the final 10% of samples against the prediction: within-cell
/// spread, reach values, and common values (constant or reduced arc).
[[nodiscard]] inline VerificationRecord verify(const HybridTrajectory& traj, const ConsensusReport& report, double tol) {
    if (traj.samples.empty()) throw InvalidArgument("verify: empty trajectory");
    if (traj.samples.front().x.size() != report.n) {
        throw DimensionError("verify: trajectory over " + std::to_string(traj.samples.front().x.size()) +
                             " nodes, report over " + std::to_string(report.n));
    }
    VerificationRecord rec;
    rec.tol = tol;
    const std::size_t count = traj.samples.size();
    rec.first_sample = std::min(count - 1, static_cast<std::size_t>(std::floor(0.9 * static_cast<double>(count))));
    const auto tail = std::span(traj.samples).subspan(rec.first_sample);

    VerificationCheck spread{"cell_spread"};
    for (const auto& s : tail) spread.error = std::max(spread.error, cell_spread(s.x, report.partition));
    spread.passed = spread.error < tol;
    rec.checks.push_back(spread);

    for (std::size_t i = 0; i < report.reaches.size(); ++i) {
        const auto& r = report.reaches[i];
        VerificationCheck ch{"reach_" + std::to_string(i + 1)};
        for (const auto& s : tail)
            for (Node v : r.nodes) ch.error = std::max(ch.error, std::abs(s.x[v] - r.value));
        ch.passed = ch.error < tol;
        rec.checks.push_back(ch);
    }

    VerificationCheck constant{"common_constant"};
    VerificationCheck arc{"common_arc"};
    constant.applicable = report.common_is_constant();
    arc.applicable = report.common_kind.has_value() && !constant.applicable;
    if (constant.applicable) {
        const auto& cc = std::get<ConstantCommon>(*report.common_kind);
        for (const auto& s : tail)
            for (std::size_t r = 0; r < report.common.size(); ++r)
                constant.error = std::max(constant.error, std::abs(s.x[report.common[r]] - cc.node_values[r]));
        constant.passed = constant.error < tol;
    }
    if (arc.applicable) {
        const HybridTrajectory ref = reduced_reference(report, traj);
        if (ref.samples.size() != count) {
            throw DimensionError("verify: reference has " + std::to_string(ref.samples.size()) +
                                 " samples, trajectory " + std::to_string(count) + " (time domains differ)");
        }
        for (std::size_t k = rec.first_sample; k < count; ++k) {
            const auto& s = traj.samples[k];
            const auto& q = ref.samples[k];
            if (s.j != q.j || std::abs(s.t - q.t) > 1e-12 * std::max(1.0, std::abs(s.t))) {
                throw DimensionError("verify: reference and trajectory sample grids differ at index " +
                                     std::to_string(k));
            }
            for (std::size_t r = 0; r < report.common.size(); ++r)
                arc.error = std::max(arc.error, std::abs(s.x[report.common[r]] - q.x[r]));
        }
        arc.passed = arc.error < tol;
    }
    rec.checks.push_back(constant);
    rec.checks.push_back(arc);
    return rec;
}

}  // namespace hycon
