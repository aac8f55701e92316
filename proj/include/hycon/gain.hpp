#pragma once

/// @file gain.hpp
/// Admissible coupling gains, the reverse monodromy matrix over one dwell
/// period, and a quadratic Lyapunov certificate for periodic jumps.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <vector>

#include "hycon/error.hpp"
#include "hycon/linalg.hpp"
#include "hycon/matrix.hpp"
#include "hycon/partition.hpp"
#include "hycon/spectral.hpp"

namespace hycon {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct GainBounds {
    /// min 2 Re(l) / |l|^2 over nonzero eigenvalues l of the jump Laplacian.
    double alpha_star = kInfinity;
    /// min 1 / Re(l) over the same eigenvalues.
    double alpha_second = kInfinity;
    /// min(alpha_star, alpha_second).
    double alpha_conv = kInfinity;
    /// alpha_conv further capped by 1 / (max in-degree) so that I - alpha L_j
    /// keeps a nonnegative diagonal.
    double alpha_nonneg = kInfinity;
    std::optional<Complex> star_witness;
    std::optional<Complex> second_witness;
};

namespace detail {

inline std::vector<Complex> nonzero_eigenvalues(const Matrix& l) {
    const double tol = zero_eigenvalue_tolerance(l);
    std::vector<Complex> out;
    for (const auto& e : spectrum(l))
        if (std::abs(e) >= tol) out.push_back(e);
    return out;
}

inline void require_square(const Matrix& m, const char* what) {
    if (!m.is_square()) throw DimensionError(std::string(what) + " must be square, got " + m.shape());
}

}  // namespace detail

[[nodiscard]] inline GainBounds alpha_convergence_bound(const Matrix& l_jump) {
    detail::require_square(l_jump, "jump Laplacian");
    GainBounds b;
    for (const auto& e : detail::nonzero_eigenvalues(l_jump)) {
        const double star = 2.0 * e.real() / std::norm(e);
        if (star < b.alpha_star) {
            b.alpha_star = star;
            b.star_witness = e;
        }
        const double second = 1.0 / e.real();
        if (second < b.alpha_second) {
            b.alpha_second = second;
            b.second_witness = e;
        }
    }
    b.alpha_conv = std::min(b.alpha_star, b.alpha_second);
    double max_diag = 0.0;
    for (std::size_t i = 0; i < l_jump.rows(); ++i) max_diag = std::max(max_diag, l_jump(i, i));
    b.alpha_nonneg = max_diag > 0.0 ? std::min(b.alpha_conv, 1.0 / max_diag) : b.alpha_conv;
    return b;
}

[[nodiscard]] inline double alpha_star(const Matrix& l_jump) { return alpha_convergence_bound(l_jump).alpha_star; }

/// H = expm(-L_f tau) (I - alpha L_j) and the checks that make it a
/// contraction toward its eigenvalue-1 subspace.
struct MonodromyAnalysis {
    Matrix h;
    double tau = 0.0;
    double alpha = 0.0;
    std::vector<Complex> eigenvalues;
    bool is_row_stochastic = false;
    bool is_nonnegative = false;
    bool has_positive_diagonal = false;
    bool gershgorin_contained = false;
    std::size_t unit_eigenvalue_count = 0;
    double max_row_sum_error = 0.0;
    double min_entry = 0.0;
    double min_diagonal = 0.0;
    /// Largest modulus among eigenvalues not counted as 1 (0 if there are none).
    double subdominant_modulus = 0.0;

    [[nodiscard]] bool contracting() const { return subdominant_modulus < 1.0; }
    [[nodiscard]] bool all_checks_pass() const {
        return is_row_stochastic && is_nonnegative && has_positive_diagonal && gershgorin_contained && contracting();
    }
};

inline constexpr double kEntrySlack = 1e-12;
inline constexpr double kModulusSlack = 1e-9;

[[nodiscard]] inline MonodromyAnalysis monodromy(const Matrix& l_flow, const Matrix& l_jump, double alpha,
                                                 double tau) {
    detail::require_square(l_flow, "flow Laplacian");
    detail::require_square(l_jump, "jump Laplacian");
    if (l_flow.rows() != l_jump.rows()) {
        throw DimensionError("monodromy: flow " + l_flow.shape() + " vs jump " + l_jump.shape());
    }
    if (!(alpha > 0.0)) throw InvalidArgument("monodromy: gain must be positive");
    if (!(tau > 0.0)) throw InvalidArgument("monodromy: dwell time must be positive");

    const std::size_t n = l_flow.rows();
    MonodromyAnalysis m;
    m.tau = tau;
    m.alpha = alpha;
    m.h = expm(-l_flow * tau) * (Matrix::identity(n) - alpha * l_jump);
    m.eigenvalues = spectrum(m.h);

    m.min_entry = n ? m.h(0, 0) : 0.0;
    m.min_diagonal = n ? m.h(0, 0) : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            sum += m.h(i, k);
            m.min_entry = std::min(m.min_entry, m.h(i, k));
        }
        m.max_row_sum_error = std::max(m.max_row_sum_error, std::abs(sum - 1.0));
        m.min_diagonal = std::min(m.min_diagonal, m.h(i, i));
    }
    m.is_row_stochastic = m.max_row_sum_error < kEntrySlack;
    m.is_nonnegative = m.min_entry >= -kEntrySlack;
    m.has_positive_diagonal = m.min_diagonal > 0.0;

    m.gershgorin_contained = true;
    for (const auto& e : m.eigenvalues) {
        bool inside = false;
        for (std::size_t i = 0; i < n && !inside; ++i) {
            double radius = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                if (k != i) radius += std::abs(m.h(i, k));
            inside = std::abs(e - Complex(m.h(i, i), 0.0)) <= radius + kModulusSlack;
        }
        m.gershgorin_contained = m.gershgorin_contained && inside;
    }

    for (const auto& e : m.eigenvalues) {
        if (std::abs(e - Complex(1.0, 0.0)) < kModulusSlack) {
            ++m.unit_eigenvalue_count;
        } else {
            m.subdominant_modulus = std::max(m.subdominant_modulus, std::abs(e));
        }
    }
    return m;
}

/// Quadratic certificate V = exp(-beta s) * |T2^T expm(-L_f (tau - s)) x|^2_P22
/// where s is the time since the last jump and T2 spans the orthogonal
/// complement of the consensus subspace.
struct LyapunovCertificate {
    Matrix transform;           ///< [T1 | T2], orthonormal; T1 spans the consensus subspace
    std::size_t consensus_dim = 0;
    Matrix h_tilde;             ///< T^T H T, block upper triangular
    Matrix p22;                 ///< solves H22^T P H22 - P = -I
    double kappa = 1.0;
    double beta = 0.0;
    double beta_max = 0.0;
    double lambda_max = 0.0;    ///< largest eigenvalue of p22
    double lambda_min = 0.0;
    double invariance_residual = 0.0;  ///< max |T2^T H T1|
    double lyapunov_residual = 0.0;    ///< max |H22^T P H22 - P + I|
    double h22_spectral_radius = 0.0;
    double tau = 0.0;
    double alpha = 0.0;
    Matrix l_flow;

    [[nodiscard]] std::size_t complement_dim() const { return transform.cols() - consensus_dim; }
    [[nodiscard]] Matrix complement_basis() const {
        return transform.block(0, consensus_dim, transform.rows(), complement_dim());
    }
};

/// Columns p(cell) / sqrt(|cell|).
[[nodiscard]] inline Matrix consensus_basis(const Partition& p) {
    Matrix t(p.size(), p.num_cells());
    for (std::size_t k = 0; k < p.num_cells(); ++k) {
        const double w = 1.0 / std::sqrt(static_cast<double>(p.cell(k).size()));
        for (Node v : p.cell(k)) t(v, k) = w;
    }
    return t;
}

/// Solves A^T P A - P = -Q through (I - A^T kron A^T) vec P = vec Q.
[[nodiscard]] inline Matrix solve_discrete_lyapunov(const Matrix& a, const Matrix& q) {
    const std::size_t n = a.rows();
    const std::size_t nn = n * n;
    Matrix sys = Matrix::identity(nn);
    // vec is column-stacking: vec(P)[i + n j] = P(i, j); (A^T P A)(i, j) = sum_{k,l} A(k,i) P(k,l) A(l,j)
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t l = 0; l < n; ++l)
                for (std::size_t k = 0; k < n; ++k) sys(i + n * j, k + n * l) -= a(k, i) * a(l, j);
    Vector rhs(nn);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) rhs[i + n * j] = q(i, j);
    const Vector sol = solve_checked(sys, rhs);
    Matrix p(n, n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) p(i, j) = sol[i + n * j];
    return 0.5 * (p + p.transpose());
}

[[nodiscard]] inline LyapunovCertificate lyapunov_certificate(const Matrix& l_flow, const Matrix& l_jump,
                                                              double alpha, double tau,
                                                              const Partition& consensus_partition) {
    const auto mono = monodromy(l_flow, l_jump, alpha, tau);
    const std::size_t n = l_flow.rows();
    if (consensus_partition.size() != n) {
        throw DimensionError("lyapunov_certificate: partition over " + std::to_string(consensus_partition.size()) +
                             " nodes, matrices are " + l_flow.shape());
    }

    LyapunovCertificate c;
    c.tau = tau;
    c.alpha = alpha;
    c.l_flow = l_flow;
    c.consensus_dim = consensus_partition.num_cells();
    c.transform = complete_orthonormal_basis(consensus_basis(consensus_partition));
    c.h_tilde = c.transform.transpose() * mono.h * c.transform;

    const std::size_t r = c.consensus_dim;
    const std::size_t m = n - r;
    const Matrix h21 = c.h_tilde.block(r, 0, m, r);
    for (double v : h21.data()) c.invariance_residual = std::max(c.invariance_residual, std::abs(v));
    if (c.invariance_residual > 1e-9 * (1.0 + norm_inf(mono.h))) {
        throw NumericalError("lyapunov_certificate: consensus subspace is not invariant under the monodromy "
                             "matrix (residual " + std::to_string(c.invariance_residual) + ")");
    }

    if (m == 0) {
        c.beta_max = kInfinity;
        c.beta = 1.0 / tau;
        return c;
    }

    const Matrix h22 = c.h_tilde.block(r, r, m, m);
    c.h22_spectral_radius = spectral_radius(h22);
    if (!(c.h22_spectral_radius < 1.0 - kModulusSlack)) {
        throw NumericalError("lyapunov_certificate: monodromy matrix is not Schur off the consensus subspace "
                             "(spectral radius " + std::to_string(c.h22_spectral_radius) + ")");
    }
    c.p22 = solve_discrete_lyapunov(h22, Matrix::identity(m));
    const Matrix resid = h22.transpose() * c.p22 * h22 - c.p22 + Matrix::identity(m);
    for (double v : resid.data()) c.lyapunov_residual = std::max(c.lyapunov_residual, std::abs(v));
    const Vector eig = symmetric_eigenvalues(c.p22);
    c.lambda_min = eig.front();
    c.lambda_max = eig.back();
    if (!(c.lambda_min > 0.0) || c.lyapunov_residual > 1e-8 * c.lambda_max) {
        throw NumericalError("lyapunov_certificate: Lyapunov solve failed (min eigenvalue " +
                             std::to_string(c.lambda_min) + ", residual " + std::to_string(c.lyapunov_residual) + ")");
    }
    if (c.lambda_max - c.kappa <= 0.0) {
        // P22 = I: any discount rate works; pick the natural time scale.
        c.beta_max = kInfinity;
        c.beta = 1.0 / tau;
    } else {
        c.beta_max = std::log(c.lambda_max / (c.lambda_max - c.kappa)) / tau;
        c.beta = 0.5 * c.beta_max;
    }
    return c;
}

/// Component of x orthogonal to the consensus subspace, in the complement basis.
[[nodiscard]] inline Vector consensus_offset(const LyapunovCertificate& c, std::span<const double> x) {
    return left_multiply(x, c.complement_basis());
}

/// V at state x, `since_jump` seconds after the last jump of a tau-periodic domain.
[[nodiscard]] inline double lyapunov_value(const LyapunovCertificate& c, std::span<const double> x,
                                           double since_jump) {
    if (x.size() != c.transform.rows()) throw DimensionError("lyapunov_value: state length mismatch");
    if (c.complement_dim() == 0) return 0.0;
    const double remaining = std::max(0.0, c.tau - since_jump);
    const Vector ahead = expm(-c.l_flow * remaining) * x;
    const Vector z = consensus_offset(c, ahead);
    return std::exp(-c.beta * since_jump) * dot(z, c.p22 * z);
}

/// Upper bound on V(after jump) - V(before jump) per unit |x2|^2.
[[nodiscard]] inline double jump_decrease_bound(const LyapunovCertificate& c) {
    if (c.complement_dim() == 0) return 0.0;
    return -(1.0 - (1.0 - std::exp(-c.beta * c.tau)) * c.lambda_max);
}

}  // namespace hycon
