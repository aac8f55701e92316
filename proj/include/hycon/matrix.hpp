#pragma once

/// @file matrix.hpp
/// Dense row-major matrices used throughout the toolkit.
///
/// `IntMatrix` carries exact integer data (Laplacians, characteristic
/// matrices); `Matrix` carries doubles for spectra, exponentials and solves.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hycon/error.hpp"

namespace hycon {

using Vector = std::vector<double>;

template <typename T>
class BasicMatrix {
  public:
    using value_type = T;

    BasicMatrix() = default;
    BasicMatrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    BasicMatrix(std::initializer_list<std::initializer_list<T>> init) {
        rows_ = init.size();
        cols_ = rows_ ? init.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& row : init) {
            if (row.size() != cols_) {
                throw DimensionError("ragged matrix initializer");
            }
            data_.insert(data_.end(), row.begin(), row.end());
        }
    }

    static BasicMatrix identity(std::size_t n) {
        BasicMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            m(i, i) = T{1};
        }
        return m;
    }

    static BasicMatrix diagonal(std::span<const T> d) {
        BasicMatrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) {
            m(i, i) = d[i];
        }
        return m;
    }

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }
    [[nodiscard]] bool is_square() const noexcept { return rows_ == cols_; }

    T& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    [[nodiscard]] std::span<T> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    [[nodiscard]] std::span<const T> row(std::size_t r) const noexcept {
        return {data_.data() + r * cols_, cols_};
    }

    [[nodiscard]] std::vector<T> column(std::size_t c) const {
        std::vector<T> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) {
            out[r] = (*this)(r, c);
        }
        return out;
    }

    [[nodiscard]] const std::vector<T>& data() const noexcept { return data_; }

    [[nodiscard]] BasicMatrix transpose() const {
        BasicMatrix t(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r) {
            for (std::size_t c = 0; c < cols_; ++c) {
                t(c, r) = (*this)(r, c);
            }
        }
        return t;
    }

    /// Picks the rows and columns listed (in that order).
    [[nodiscard]] BasicMatrix select(std::span<const std::size_t> row_idx,
                                     std::span<const std::size_t> col_idx) const {
        BasicMatrix out(row_idx.size(), col_idx.size());
        for (std::size_t r = 0; r < row_idx.size(); ++r) {
            for (std::size_t c = 0; c < col_idx.size(); ++c) {
                out(r, c) = (*this)(row_idx[r], col_idx[c]);
            }
        }
        return out;
    }

    [[nodiscard]] BasicMatrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
        BasicMatrix out(nr, nc);
        for (std::size_t r = 0; r < nr; ++r) {
            for (std::size_t c = 0; c < nc; ++c) {
                out(r, c) = (*this)(r0 + r, c0 + c);
            }
        }
        return out;
    }

    void set_block(std::size_t r0, std::size_t c0, const BasicMatrix& b) {
        for (std::size_t r = 0; r < b.rows(); ++r) {
            for (std::size_t c = 0; c < b.cols(); ++c) {
                (*this)(r0 + r, c0 + c) = b(r, c);
            }
        }
    }

    template <typename U>
    [[nodiscard]] BasicMatrix<U> cast() const {
        BasicMatrix<U> out(rows_, cols_);
        for (std::size_t r = 0; r < rows_; ++r) {
            for (std::size_t c = 0; c < cols_; ++c) {
                out(r, c) = static_cast<U>((*this)(r, c));
            }
        }
        return out;
    }

    BasicMatrix& operator+=(const BasicMatrix& o) {
        require_same_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    BasicMatrix& operator-=(const BasicMatrix& o) {
        require_same_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    BasicMatrix& operator*=(T s) {
        for (auto& v : data_) v *= s;
        return *this;
    }

    friend BasicMatrix operator+(BasicMatrix a, const BasicMatrix& b) { return a += b; }
    friend BasicMatrix operator-(BasicMatrix a, const BasicMatrix& b) { return a -= b; }
    friend BasicMatrix operator*(BasicMatrix a, T s) { return a *= s; }
    friend BasicMatrix operator*(T s, BasicMatrix a) { return a *= s; }
    friend BasicMatrix operator-(BasicMatrix a) { return a *= T{-1}; }

    friend BasicMatrix operator*(const BasicMatrix& a, const BasicMatrix& b) {
        if (a.cols_ != b.rows_) {
            throw DimensionError("matrix product: " + a.shape() + " * " + b.shape());
        }
        BasicMatrix out(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const T aik = a(i, k);
                if (aik == T{}) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) {
                    out(i, j) += aik * b(k, j);
                }
            }
        }
        return out;
    }

    friend std::vector<T> operator*(const BasicMatrix& a, std::span<const T> x) {
        if (a.cols_ != x.size()) {
            throw DimensionError("matrix-vector product: " + a.shape() + " * " + std::to_string(x.size()));
        }
        std::vector<T> y(a.rows_, T{});
        for (std::size_t i = 0; i < a.rows_; ++i) {
            T acc{};
            for (std::size_t k = 0; k < a.cols_; ++k) acc += a(i, k) * x[k];
            y[i] = acc;
        }
        return y;
    }
    friend std::vector<T> operator*(const BasicMatrix& a, const std::vector<T>& x) {
        return a * std::span<const T>(x);
    }

    friend bool operator==(const BasicMatrix& a, const BasicMatrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

    [[nodiscard]] std::string shape() const {
        return std::to_string(rows_) + "x" + std::to_string(cols_);
    }

  private:
    void require_same_shape(const BasicMatrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) {
            throw DimensionError("shape mismatch: " + shape() + " vs " + o.shape());
        }
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using Matrix = BasicMatrix<double>;
using IntMatrix = BasicMatrix<std::int64_t>;

/// Max absolute row sum.
template <typename T>
[[nodiscard]] double norm_inf(const BasicMatrix<T>& m) {
    double best = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        double s = 0.0;
        for (auto v : m.row(r)) s += std::abs(static_cast<double>(v));
        best = std::max(best, s);
    }
    return best;
}

/// Max absolute column sum.
template <typename T>
[[nodiscard]] double norm_1(const BasicMatrix<T>& m) {
    double best = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < m.rows(); ++r) s += std::abs(static_cast<double>(m(r, c)));
        best = std::max(best, s);
    }
    return best;
}

[[nodiscard]] inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError("max_abs_diff: " + a.shape() + " vs " + b.shape());
    }
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    }
    return m;
}

[[nodiscard]] inline bool all_finite(const Matrix& m) {
    return std::ranges::all_of(m.data(), [](double v) { return std::isfinite(v); });
}

[[nodiscard]] inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

[[nodiscard]] inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// Vector times matrix, i.e. (x^T A)^T.
[[nodiscard]] inline Vector left_multiply(std::span<const double> x, const Matrix& a) {
    if (x.size() != a.rows()) {
        throw DimensionError("left_multiply: " + std::to_string(x.size()) + " * " + a.shape());
    }
    Vector y(a.cols(), 0.0);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c) y[c] += x[r] * a(r, c);
    }
    return y;
}

// Plain-text matrix format: "rows cols" then one row per line.

template <typename T>
void write_matrix(std::ostream& os, const BasicMatrix<T>& m) {
    os << m.rows() << ' ' << m.cols() << '\n';
    const auto old_prec = os.precision(std::numeric_limits<double>::max_digits10);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (c) os << ' ';
            os << m(r, c);
        }
        os << '\n';
    }
    os.precision(old_prec);
}

[[nodiscard]] inline Matrix read_matrix(std::istream& is) {
    std::size_t rows = 0;
    std::size_t cols = 0;
    if (!(is >> rows >> cols)) {
        throw ParseError("matrix header: expected '<rows> <cols>'", 1);
    }
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            std::string tok;
            if (!(is >> tok)) {
                throw ParseError("matrix truncated", r + 2);
            }
            try {
                std::size_t used = 0;
                m(r, c) = std::stod(tok, &used);
                if (used != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw ParseError("not a number: '" + tok + "'", r + 2);
            }
            if (!std::isfinite(m(r, c))) {
                throw ParseError("non-finite entry", r + 2);
            }
        }
    }
    return m;
}

template <typename T>
std::ostream& operator<<(std::ostream& os, const BasicMatrix<T>& m) {
    write_matrix(os, m);
    return os;
}

}  // namespace hycon
