#pragma once

/// @file linalg.hpp
/// Small dense solvers: LU with partial pivoting, symmetric Jacobi
/// eigenvalues, one-sided Jacobi singular values, orthonormal completion.
/// Sized for desk-scale problems (n up to a few hundred).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "hycon/error.hpp"
#include "hycon/matrix.hpp"

namespace hycon {

/// PA = LU factorization with partial pivoting, packed into one matrix.
class LuDecomposition {
  public:
    explicit LuDecomposition(Matrix a) : lu_(std::move(a)), perm_(lu_.rows()) {
        if (!lu_.is_square()) {
            throw DimensionError("LU of non-square " + lu_.shape());
        }
        const std::size_t n = lu_.rows();
        std::iota(perm_.begin(), perm_.end(), std::size_t{0});
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t p = k;
            double best = std::abs(lu_(k, k));
            for (std::size_t i = k + 1; i < n; ++i) {
                if (std::abs(lu_(i, k)) > best) {
                    best = std::abs(lu_(i, k));
                    p = i;
                }
            }
            if (best == 0.0) {
                singular_ = true;
                continue;
            }
            if (p != k) {
                for (std::size_t c = 0; c < n; ++c) std::swap(lu_(k, c), lu_(p, c));
                std::swap(perm_[k], perm_[p]);
            }
            for (std::size_t i = k + 1; i < n; ++i) {
                const double f = lu_(i, k) / lu_(k, k);
                lu_(i, k) = f;
                if (f == 0.0) continue;
                for (std::size_t c = k + 1; c < n; ++c) lu_(i, c) -= f * lu_(k, c);
            }
        }
    }

    [[nodiscard]] bool singular() const noexcept { return singular_; }
    [[nodiscard]] std::size_t size() const noexcept { return lu_.rows(); }

    [[nodiscard]] Vector solve(std::span<const double> b) const {
        const std::size_t n = size();
        if (b.size() != n) throw DimensionError("LU solve: rhs length mismatch");
        if (singular_) throw NumericalError("LU solve: matrix is singular");
        Vector x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < i; ++k) x[i] -= lu_(i, k) * x[k];
        }
        for (std::size_t i = n; i-- > 0;) {
            for (std::size_t k = i + 1; k < n; ++k) x[i] -= lu_(i, k) * x[k];
            x[i] /= lu_(i, i);
        }
        return x;
    }

    [[nodiscard]] Matrix solve(const Matrix& b) const {
        if (b.rows() != size()) throw DimensionError("LU solve: rhs " + b.shape());
        Matrix x(b.rows(), b.cols());
        for (std::size_t c = 0; c < b.cols(); ++c) {
            const auto col = solve(b.column(c));
            for (std::size_t r = 0; r < b.rows(); ++r) x(r, c) = col[r];
        }
        return x;
    }

    [[nodiscard]] Matrix inverse() const { return solve(Matrix::identity(size())); }

  private:
    Matrix lu_;
    std::vector<std::size_t> perm_;
    bool singular_ = false;
};

/// 1-norm condition number, computed with an explicit inverse (fine at this scale).
[[nodiscard]] inline double condition_number(const Matrix& a) {
    if (a.rows() == 0) return 1.0;
    LuDecomposition lu(a);
    if (lu.singular()) return std::numeric_limits<double>::infinity();
    return norm_1(a) * norm_1(lu.inverse());
}

/// Solves A x = b, refusing systems whose condition number exceeds `max_condition`.
[[nodiscard]] inline Vector solve_checked(const Matrix& a, std::span<const double> b,
                                          double max_condition = 1e12) {
    LuDecomposition lu(a);
    if (lu.singular()) throw NumericalError("linear solve: singular matrix " + a.shape());
    const double cond = norm_1(a) * norm_1(lu.inverse());
    if (!(cond <= max_condition)) {
        throw NumericalError("linear solve: ill-conditioned, condition estimate " + std::to_string(cond));
    }
    return lu.solve(b);
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
[[nodiscard]] inline Vector symmetric_eigenvalues(Matrix a) {
    if (!a.is_square()) throw DimensionError("symmetric_eigenvalues: " + a.shape());
    const std::size_t n = a.rows();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-300) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a(p, q) == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    Vector ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
    std::ranges::sort(ev);
    return ev;
}

/// Singular values by one-sided Jacobi, descending.
[[nodiscard]] inline Vector singular_values(Matrix a) {
    if (a.rows() < a.cols()) a = a.transpose();
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    for (int sweep = 0; sweep < 100; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    alpha += a(i, p) * a(i, p);
                    beta += a(i, q) * a(i, q);
                    gamma += a(i, p) * a(i, q);
                }
                if (std::abs(gamma) <= 1e-15 * std::sqrt(alpha * beta) || gamma == 0.0) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const double x = a(i, p);
                    const double y = a(i, q);
                    a(i, p) = c * x - s * y;
                    a(i, q) = s * x + c * y;
                }
            }
        }
        if (!rotated) break;
    }
    Vector sv(n);
    for (std::size_t c = 0; c < n; ++c) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += a(i, c) * a(i, c);
        sv[c] = std::sqrt(s);
    }
    std::ranges::sort(sv, std::greater<>{});
    return sv;
}

/// Rank counting singular values above `rel_tol * sigma_max`.
[[nodiscard]] inline std::size_t numerical_rank(const Matrix& a, double rel_tol = 1e-9) {
    if (a.rows() == 0 || a.cols() == 0) return 0;
    const auto sv = singular_values(a);
    if (sv.empty() || sv.front() == 0.0) return 0;
    return static_cast<std::size_t>(
        std::ranges::count_if(sv, [&](double s) { return s > rel_tol * sv.front(); }));
}

/// Extends the orthonormal columns of `basis` to an orthonormal basis of R^n.
/// Candidates are the unit vectors; each step takes the one with the largest
/// residual after projection (ties to the lowest index), with re-orthogonalization.
[[nodiscard]] inline Matrix complete_orthonormal_basis(const Matrix& basis) {
    const std::size_t n = basis.rows();
    std::vector<Vector> cols;
    for (std::size_t c = 0; c < basis.cols(); ++c) cols.push_back(basis.column(c));

    auto residual = [&](std::size_t k) {
        Vector v(n, 0.0);
        v[k] = 1.0;
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& q : cols) {
                const double d = dot(q, v);
                for (std::size_t i = 0; i < n; ++i) v[i] -= d * q[i];
            }
        }
        return v;
    };

    std::vector<bool> used(n, false);
    while (cols.size() < n) {
        std::size_t best_k = n;
        double best_norm = -1.0;
        Vector best_v;
        for (std::size_t k = 0; k < n; ++k) {
            if (used[k]) continue;
            auto v = residual(k);
            const double nv = norm2(v);
            if (nv > best_norm + 1e-12) {
                best_norm = nv;
                best_k = k;
                best_v = std::move(v);
            }
        }
        if (best_k == n || best_norm < 1e-8) {
            throw NumericalError("orthonormal completion failed: basis columns are not independent");
        }
        used[best_k] = true;
        for (auto& x : best_v) x /= best_norm;
        cols.push_back(std::move(best_v));
    }
    Matrix out(n, n);
    for (std::size_t c = 0; c < n; ++c)
        for (std::size_t r = 0; r < n; ++r) out(r, c) = cols[c][r];
    return out;
}

}  // namespace hycon
