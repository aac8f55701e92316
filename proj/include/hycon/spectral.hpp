#pragma once

/// @file spectral.hpp
/// Laplacians, the reach-block triangular form, dense nonsymmetric spectra
/// and the matrix exponential.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "hycon/error.hpp"
#include "hycon/graph.hpp"
#include "hycon/linalg.hpp"
#include "hycon/matrix.hpp"

namespace hycon {

using Complex = std::complex<double>;

/// L = D - A with D the in-degree matrix and A[v][u] = 1 iff (u, v) is an edge.
[[nodiscard]] inline IntMatrix laplacian(const Digraph& g) {
    IntMatrix l(g.size(), g.size());
    for (const auto& e : g.edges()) {
        l(e.dst, e.dst) += 1;
        l(e.dst, e.src) -= 1;
    }
    return l;
}

[[nodiscard]] inline Matrix real_laplacian(const Digraph& g) { return laplacian(g).cast<double>(); }

/// Scale-aware threshold below which an eigenvalue modulus counts as zero.
[[nodiscard]] inline double zero_eigenvalue_tolerance(const Matrix& l) { return 1e-9 * (1.0 + norm_inf(l)); }

namespace detail {

/// Householder reduction to upper Hessenberg form (in place).
inline void reduce_to_hessenberg(Matrix& a) {
    const std::size_t n = a.rows();
    if (n < 3) return;
    Vector v(n);
    for (std::size_t k = 0; k + 2 < n; ++k) {
        double alpha = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) alpha += a(i, k) * a(i, k);
        alpha = std::sqrt(alpha);
        if (alpha == 0.0) continue;
        if (a(k + 1, k) > 0) alpha = -alpha;
        std::fill(v.begin(), v.end(), 0.0);
        v[k + 1] = a(k + 1, k) - alpha;
        for (std::size_t i = k + 2; i < n; ++i) v[i] = a(i, k);
        double vnorm2 = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) vnorm2 += v[i] * v[i];
        if (vnorm2 == 0.0) continue;
        // A <- (I - 2vv^T/v^Tv) A (I - 2vv^T/v^Tv)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = k + 1; i < n; ++i) s += v[i] * a(i, j);
            s = 2.0 * s / vnorm2;
            for (std::size_t i = k + 1; i < n; ++i) a(i, j) -= s * v[i];
        }
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = k + 1; j < n; ++j) s += a(i, j) * v[j];
            s = 2.0 * s / vnorm2;
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= s * v[j];
        }
        for (std::size_t i = k + 2; i < n; ++i) a(i, k) = 0.0;
    }
}

inline double sign_of(double a, double b) { return b >= 0.0 ? std::abs(a) : -std::abs(a); }

/// Francis double-shift QR on an upper Hessenberg matrix, driving it to real
/// Schur form; 2x2 diagonal blocks yield complex-conjugate pairs.
inline std::vector<Complex> hessenberg_qr_eigenvalues(Matrix a) {
    const int n = static_cast<int>(a.rows());
    std::vector<double> wr(n, 0.0);
    std::vector<double> wi(n, 0.0);
    const int max_iterations = 100 * std::max(n, 1);
    int total_iterations = 0;

    double anorm = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(a(i, j));

    const double eps = std::numeric_limits<double>::epsilon();
    int nn = n - 1;
    double t = 0.0;
    double p = 0, q = 0, r = 0, s = 0, w = 0, x = 0, y = 0, z = 0;
    while (nn >= 0) {
        int its = 0;
        int l = 0;
        do {
            for (l = nn; l >= 1; --l) {
                s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
                if (s == 0.0) s = anorm;
                if (std::abs(a(l, l - 1)) <= eps * s) {
                    a(l, l - 1) = 0.0;
                    break;
                }
            }
            x = a(nn, nn);
            if (l == nn) {
                wr[nn] = x + t;
                wi[nn] = 0.0;
                --nn;
            } else {
                y = a(nn - 1, nn - 1);
                w = a(nn, nn - 1) * a(nn - 1, nn);
                if (l == nn - 1) {
                    p = 0.5 * (y - x);
                    q = p * p + w;
                    z = std::sqrt(std::abs(q));
                    x += t;
                    if (q >= 0.0) {
                        z = p + sign_of(z, p);
                        wr[nn - 1] = wr[nn] = x + z;
                        if (z != 0.0) wr[nn] = x - w / z;
                        wi[nn - 1] = wi[nn] = 0.0;
                    } else {
                        wr[nn - 1] = wr[nn] = x + p;
                        wi[nn - 1] = -z;
                        wi[nn] = z;
                    }
                    nn -= 2;
                } else {
                    if (++total_iterations > max_iterations) {
                        throw NumericalError("eigenvalue QR iteration did not converge after " +
                                             std::to_string(total_iterations - 1) + " iterations");
                    }
                    if (its == 10 || its == 20) {
                        // exceptional shift
                        t += x;
                        for (int i = 0; i <= nn; ++i) a(i, i) -= x;
                        s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
                        y = x = 0.75 * s;
                        w = -0.4375 * s * s;
                    }
                    ++its;
                    int m = nn - 2;
                    for (; m >= l; --m) {
                        z = a(m, m);
                        r = x - z;
                        s = y - z;
                        p = (r * s - w) / a(m + 1, m) + a(m, m + 1);
                        q = a(m + 1, m + 1) - z - r - s;
                        r = a(m + 2, m + 1);
                        s = std::abs(p) + std::abs(q) + std::abs(r);
                        p /= s;
                        q /= s;
                        r /= s;
                        if (m == l) break;
                        const double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
                        const double v = std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) + std::abs(a(m + 1, m + 1)));
                        if (u <= eps * v) break;
                    }
                    for (int i = m + 2; i <= nn; ++i) {
                        a(i, i - 2) = 0.0;
                        if (i != m + 2) a(i, i - 3) = 0.0;
                    }
                    for (int k = m; k <= nn - 1; ++k) {
                        if (k != m) {
                            p = a(k, k - 1);
                            q = a(k + 1, k - 1);
                            r = 0.0;
                            if (k != nn - 1) r = a(k + 2, k - 1);
                            x = std::abs(p) + std::abs(q) + std::abs(r);
                            if (x != 0.0) {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        s = sign_of(std::sqrt(p * p + q * q + r * r), p);
                        if (s != 0.0) {
                            if (k == m) {
                                if (l != m) a(k, k - 1) = -a(k, k - 1);
                            } else {
                                a(k, k - 1) = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for (int j = k; j <= nn; ++j) {
                                p = a(k, j) + q * a(k + 1, j);
                                if (k != nn - 1) {
                                    p += r * a(k + 2, j);
                                    a(k + 2, j) -= p * z;
                                }
                                a(k + 1, j) -= p * y;
                                a(k, j) -= p * x;
                            }
                            const int mmin = nn < k + 3 ? nn : k + 3;
                            for (int i = l; i <= mmin; ++i) {
                                p = x * a(i, k) + y * a(i, k + 1);
                                if (k != nn - 1) {
                                    p += z * a(i, k + 2);
                                    a(i, k + 2) -= p * r;
                                }
                                a(i, k + 1) -= p * q;
                                a(i, k) -= p;
                            }
                        }
                    }
                }
            }
        } while (l < nn - 1);
    }
    std::vector<Complex> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) out.emplace_back(wr[i], wi[i]);
    return out;
}

}  // namespace detail

/// All eigenvalues of a square matrix, sorted by (real part, imaginary part).
[[nodiscard]] inline std::vector<Complex> spectrum(const Matrix& m) {
    if (!m.is_square()) throw DimensionError("spectrum of non-square " + m.shape());
    if (!all_finite(m)) throw NumericalError("spectrum: non-finite matrix entries");
    Matrix h = m;
    detail::reduce_to_hessenberg(h);
    auto ev = detail::hessenberg_qr_eigenvalues(std::move(h));
    std::ranges::sort(ev, [](const Complex& a, const Complex& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return ev;
}

[[nodiscard]] inline double spectral_radius(const Matrix& m) {
    double r = 0.0;
    for (const auto& e : spectrum(m)) r = std::max(r, std::abs(e));
    return r;
}

/// Matrix exponential by scaling and squaring with a diagonal Pade
/// approximant of degree 3, 5, 7, 9 or 13 (Higham's theta thresholds).
[[nodiscard]] inline Matrix expm(const Matrix& a) {
    if (!a.is_square()) throw DimensionError("expm of non-square " + a.shape());
    const std::size_t n = a.rows();
    if (n == 0) return a;
    const double norm = norm_1(a);
    if (!std::isfinite(norm)) throw NumericalError("expm: non-finite input");

    static constexpr std::array<double, 14> b13 = {
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
        129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
        1323241920.0,        40840800.0,          960960.0,           16380.0,
        182.0,               1.0};
    static constexpr std::array<double, 4> theta = {1.495585217958292e-2, 2.539398330063230e-1,
                                                    9.504178996162932e-1, 2.097847961257068e0};
    static constexpr double theta13 = 5.371920351148152e0;

    const Matrix eye = Matrix::identity(n);
    auto pade_low = [&](const std::vector<double>& b) {
        // U = A * sum_{odd k} b_k A^{k-1},  V = sum_{even k} b_k A^k
        const Matrix a2 = a * a;
        Matrix power = eye;
        Matrix u(n, n);
        Matrix v(n, n);
        for (std::size_t k = 0; k < b.size(); k += 2) {
            v += b[k] * power;
            u += b[k + 1] * power;
            power = power * a2;
        }
        return std::pair{a * u, v};
    };

    auto finish = [&](const Matrix& u, const Matrix& v, int squarings) {
        LuDecomposition lu(v - u);
        if (lu.singular()) throw NumericalError("expm: singular Pade denominator");
        Matrix r = lu.solve(v + u);
        for (int i = 0; i < squarings; ++i) r = r * r;
        if (!all_finite(r)) throw NumericalError("expm: overflow (norm " + std::to_string(norm) + ")");
        return r;
    };

    if (norm <= theta[0]) {
        auto [u, v] = pade_low({120.0, 60.0, 12.0, 1.0});
        return finish(u, v, 0);
    }
    if (norm <= theta[1]) {
        auto [u, v] = pade_low({30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0});
        return finish(u, v, 0);
    }
    if (norm <= theta[2]) {
        auto [u, v] = pade_low({17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0});
        return finish(u, v, 0);
    }
    if (norm <= theta[3]) {
        auto [u, v] = pade_low({17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0, 2162160.0,
                                110880.0, 3960.0, 90.0, 1.0});
        return finish(u, v, 0);
    }

    int squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / theta13))));
    if (squarings > 1000) throw NumericalError("expm: overflow (norm " + std::to_string(norm) + ")");
    const Matrix as = a * std::ldexp(1.0, -squarings);
    const Matrix a2 = as * as;
    const Matrix a4 = a2 * a2;
    const Matrix a6 = a4 * a2;
    const auto& b = b13;
    const Matrix u = as * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 +
                           b[1] * eye);
    const Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * eye;
    return finish(u, v, squarings);
}

/// The Laplacian rewritten in reach-block lower-triangular form:
///
///     [ L_1            0 ]
///     [      ...       : ]
///     [          L_mu  0 ]
///     [ M_1 ...  M_mu  M ]
///
/// together with the zero-eigenvalue eigenvectors. Right eigenvectors are
/// (0, .., 1_{h_i}, .., 0, gamma^i); left ones are v_i on H_i and zero elsewhere.
struct LaplacianDecomposition {
    ReachDecomposition reach;
    std::vector<Node> permutation;  ///< position -> original node label
    std::vector<Matrix> reach_blocks;
    std::vector<Matrix> coupling_blocks;
    Matrix common_block;
    std::vector<Vector> gamma;      ///< gamma^i, length c
    std::vector<Vector> left_null;  ///< v_i, length h_i, nonnegative, sums to 1

    [[nodiscard]] std::size_t size() const noexcept { return permutation.size(); }
    [[nodiscard]] std::size_t mu() const noexcept { return reach_blocks.size(); }

    /// z_i in permuted coordinates.
    [[nodiscard]] Vector right_zero_eigvec(std::size_t i) const {
        Vector z(size(), 0.0);
        std::size_t offset = 0;
        for (std::size_t k = 0; k < i; ++k) offset += reach_blocks[k].rows();
        for (std::size_t r = 0; r < reach_blocks[i].rows(); ++r) z[offset + r] = 1.0;
        const std::size_t tail = size() - common_block.rows();
        for (std::size_t r = 0; r < gamma[i].size(); ++r) z[tail + r] = gamma[i][r];
        return z;
    }

    /// v~_i in permuted coordinates.
    [[nodiscard]] Vector left_zero_eigvec(std::size_t i) const {
        Vector v(size(), 0.0);
        std::size_t offset = 0;
        for (std::size_t k = 0; k < i; ++k) offset += reach_blocks[k].rows();
        for (std::size_t r = 0; r < left_null[i].size(); ++r) v[offset + r] = left_null[i][r];
        return v;
    }

    /// Maps a permuted-coordinate vector back to original node labels.
    [[nodiscard]] Vector to_original(std::span<const double> permuted) const {
        Vector out(size(), 0.0);
        for (std::size_t k = 0; k < size(); ++k) out[permutation[k]] = permuted[k];
        return out;
    }
};

/// Permutes `l` by the reach structure `reach` and extracts blocks and
/// zero-eigenvectors. Works for any matrix with the Laplacian sign pattern
/// whose support is the graph `reach` came from (e.g. L_f + alpha L_j under
/// the union graph's reaches).
[[nodiscard]] inline LaplacianDecomposition block_decompose(const Matrix& l, const ReachDecomposition& reach) {
    LaplacianDecomposition d;
    d.reach = reach;
    d.permutation = canonical_ordering(reach);
    const std::size_t n = d.permutation.size();
    if (l.rows() != n || l.cols() != n) {
        throw DimensionError("block_decompose: matrix " + l.shape() + " vs " + std::to_string(n) + " nodes");
    }
    const Matrix p = l.select(d.permutation, d.permutation);

    std::vector<std::size_t> offsets;
    std::size_t offset = 0;
    for (const auto& part : reach.exclusive_parts) {
        offsets.push_back(offset);
        offset += part.size();
    }
    const std::size_t c = reach.common.size();
    const std::size_t tail = offset;

    // Everything right of each reach block must vanish.
    for (std::size_t i = 0; i < offsets.size(); ++i) {
        const std::size_t hi = reach.exclusive_parts[i].size();
        for (std::size_t r = offsets[i]; r < offsets[i] + hi; ++r) {
            for (std::size_t col = 0; col < n; ++col) {
                const bool inside = col >= offsets[i] && col < offsets[i] + hi;
                if (!inside && p(r, col) != 0.0) {
                    throw NumericalError("block_decompose: reach block " + std::to_string(i) +
                                         " has coupling outside its exclusive part");
                }
            }
        }
    }

    d.common_block = p.block(tail, tail, c, c);
    for (std::size_t i = 0; i < offsets.size(); ++i) {
        const std::size_t hi = reach.exclusive_parts[i].size();
        d.reach_blocks.push_back(p.block(offsets[i], offsets[i], hi, hi));
        d.coupling_blocks.push_back(p.block(tail, offsets[i], c, hi));
    }

    std::optional<LuDecomposition> common_lu;
    if (c > 0) {
        const double cond = condition_number(d.common_block);
        if (!std::isfinite(cond)) {
            throw NumericalError("block_decompose: singular common block");
        }
        if (cond > 1e12) {
            throw NumericalError("block_decompose: ill-conditioned common block, condition estimate " +
                                 std::to_string(cond));
        }
        common_lu.emplace(d.common_block);
    }

    for (std::size_t i = 0; i < offsets.size(); ++i) {
        const Matrix& li = d.reach_blocks[i];
        const std::size_t hi = li.rows();

        // v^T L_i = 0 with sum(v) = 1: transpose and swap the last equation for the normalization.
        Matrix a = li.transpose();
        for (std::size_t col = 0; col < hi; ++col) a(hi - 1, col) = 1.0;
        Vector rhs(hi, 0.0);
        rhs[hi - 1] = 1.0;
        Vector v = solve_checked(a, rhs);
        for (auto& x : v)
            if (std::abs(x) < 1e-13) x = 0.0;
        d.left_null.push_back(std::move(v));

        if (c > 0) {
            Vector rhs_c(c, 0.0);
            for (std::size_t r = 0; r < c; ++r)
                for (std::size_t col = 0; col < hi; ++col) rhs_c[r] -= d.coupling_blocks[i](r, col);
            d.gamma.push_back(common_lu->solve(rhs_c));
        } else {
            d.gamma.emplace_back();
        }
    }
    return d;
}

[[nodiscard]] inline LaplacianDecomposition triangular_blocks(const Digraph& g) {
    return block_decompose(real_laplacian(g), decompose(g));
}

}  // namespace hycon
