#pragma once

/// @file report.hpp
/// JSON views of the toolkit's results (nlohmann::json; keys come out sorted).

#include <chrono>
#include <cmath>
#include <ctime>
#include <string>

#include <json.hpp>

#include "hycon/gain.hpp"
#include "hycon/graph.hpp"
#include "hycon/hybrid_sim.hpp"
#include "hycon/partition.hpp"
#include "hycon/predict.hpp"
#include "hycon/spectral.hpp"

namespace hycon {

using Json = nlohmann::json;

namespace detail {

/// JSON has no infinity; unbounded quantities are written as null.
inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json complex_json(const Complex& z) { return Json{{"re", z.real()}, {"im", z.imag()}}; }

}  // namespace detail

inline Json to_json(const Matrix& m) {
    Json rows = Json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (double v : m.row(r)) row.push_back(v + 0.0);  // no negative zeros
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Json to_json(const Digraph& g) {
    Json edges = Json::array();
    for (const auto& e : g.edges()) edges.push_back({e.src, e.dst});
    return Json{{"nodes", g.size()}, {"edges", edges}};
}

inline Json to_json(const ReachDecomposition& d) {
    return Json{{"reaches", d.reaches}, {"exclusive_parts", d.exclusive_parts}, {"common", d.common}, {"mu", d.mu()}};
}

inline Json to_json(const Partition& p) { return Json(p.cells()); }

inline Json to_json(const GainBounds& b) {
    Json j{{"alpha_star", detail::number(b.alpha_star)},
           {"alpha_second", detail::number(b.alpha_second)},
           {"alpha_conv", detail::number(b.alpha_conv)},
           {"alpha_nonneg", detail::number(b.alpha_nonneg)}};
    j["alpha_star_witness"] = b.star_witness ? detail::complex_json(*b.star_witness) : Json(nullptr);
    j["alpha_second_witness"] = b.second_witness ? detail::complex_json(*b.second_witness) : Json(nullptr);
    return j;
}

inline Json to_json(const MonodromyAnalysis& m) {
    Json eig = Json::array();
    for (const auto& e : m.eigenvalues) eig.push_back(detail::complex_json(e));
    return Json{{"tau", m.tau},
                {"alpha", m.alpha},
                {"H", to_json(m.h)},
                {"eigenvalues", eig},
                {"is_row_stochastic", m.is_row_stochastic},
                {"is_nonnegative", m.is_nonnegative},
                {"has_positive_diagonal", m.has_positive_diagonal},
                {"gershgorin_contained", m.gershgorin_contained},
                {"unit_eigenvalue_count", m.unit_eigenvalue_count},
                {"subdominant_modulus", m.subdominant_modulus},
                {"max_row_sum_error", m.max_row_sum_error},
                {"min_entry", m.min_entry},
                {"min_diagonal", m.min_diagonal}};
}

inline Json to_json(const LyapunovCertificate& c) {
    return Json{{"tau", c.tau},
                {"alpha", c.alpha},
                {"consensus_dim", c.consensus_dim},
                {"T", to_json(c.transform)},
                {"P22", to_json(c.p22)},
                {"kappa", c.kappa},
                {"beta", detail::number(c.beta)},
                {"beta_max", detail::number(c.beta_max)},
                {"lambda_max_P22", c.lambda_max},
                {"h22_spectral_radius", c.h22_spectral_radius},
                {"lyapunov_residual", c.lyapunov_residual}};
}

inline Json to_json(const ReducedDynamics& r) {
    return Json{{"common_nodes", r.common_nodes}, {"exclusive_nodes", r.exclusive_nodes},
                {"A_c", to_json(r.a_c)},          {"B_c", to_json(r.b_c)},
                {"A_d", to_json(r.a_d)},          {"B_d", to_json(r.b_d)}};
}

inline Json to_json(const ConsensusReport& r) {
    Json reaches = Json::array();
    for (const auto& rp : r.reaches) {
        reaches.push_back({{"nodes", rp.nodes},
                           {"left_eigvec", rp.left_eigvec},
                           {"value", rp.value},
                           {"timing_invariant", rp.timing_invariant}});
    }
    Json j{{"alpha", r.alpha},
           {"bounds", to_json(r.bounds)},
           {"x0", r.x0},
           {"partition", to_json(r.partition)},
           {"mu", r.mu},
           {"ordering", r.ordering},
           {"reaches", reaches},
           {"common", r.common},
           {"gammas", r.gammas},
           {"gamma_span_invariant", r.gamma_span_invariant},
           {"gamma_rank_exact", r.gamma_rank_exact},
           {"common_exact", r.common_exact},
           {"common_invariant_under_intersection", r.common_invariant_under_intersection},
           {"warnings", r.warnings}};
    if (!r.common_kind) {
        j["common_kind"] = nullptr;
    } else if (const auto* cc = std::get_if<ConstantCommon>(&*r.common_kind)) {
        j["common_kind"] = {{"kind", "constant"}, {"node_values", cc->node_values}, {"cell_values", cc->cell_values}};
    } else {
        j["common_kind"] = {{"kind", "hybrid_arc"}};
    }
    j["reduced_dynamics"] = r.reduced ? to_json(*r.reduced) : Json(nullptr);
    return j;
}

inline Json to_json(const HybridTimeDomain& d) {
    return Json{{"kind", d.kind == DomainKind::Periodic ? "periodic" : "random"},
                {"dwell_distribution", d.kind == DomainKind::Periodic ? "fixed" : "uniform"},
                {"horizon", d.horizon},
                {"tau_min", d.tau_min},
                {"tau_max", d.tau_max},
                {"seed", d.seed},
                {"jump_count", d.jump_count()}};
}

inline Json to_json(const VerificationRecord& v) {
    Json checks = Json::array();
    for (const auto& c : v.checks) {
        checks.push_back(
            {{"name", c.name}, {"applicable", c.applicable}, {"passed", c.passed}, {"error", c.error}});
    }
    return Json{{"tol", v.tol}, {"first_sample", v.first_sample}, {"passed", v.passed()}, {"checks", checks}};
}

/// UTC wall-clock time, ISO 8601. The only nondeterministic report field.
[[nodiscard]] inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace hycon
