#pragma once

// Dense row-major matrix and vector value types shared by every module.
//
// Both types are generic over the scalar so the same algorithms run in
// double precision and in exact rational arithmetic. Indexing through
// operator() / operator[] is 0-based; error messages report 1-based
// positions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "stpdft/errors.hpp"

namespace stpdft {

/// Largest element count any intermediate may reach (a 32-bit count).
inline constexpr std::size_t max_count = std::numeric_limits<std::uint32_t>::max();

/// Default element budget for forms whose size grows multiplicatively
/// (product forms, multi-head concatenation).
inline constexpr std::size_t default_size_budget = std::size_t{1} << 24;

/// a*b, throwing SizeBudgetError when the product exceeds `limit`.
inline std::size_t checked_mul(std::size_t a, std::size_t b, std::size_t limit = max_count) {
    if (a != 0 && b > limit / a) {
        throw SizeBudgetError("size " + std::to_string(a) + " x " + std::to_string(b) +
                              " exceeds the element budget " + std::to_string(limit));
    }
    return a * b;
}

template <typename T>
bool is_finite_value(const T& v) {
    if constexpr (std::is_floating_point_v<T>) {
        return std::isfinite(v);
    } else {
        return true;
    }
}

template <typename T>
class Vector {
public:
    using value_type = T;

    Vector() = default;

    explicit Vector(std::size_t dim, T fill = T(0)) : data_(dim, fill) {
        if (dim == 0) throw InvalidArgument("vector dimension must be positive");
    }

    Vector(std::initializer_list<T> values) : data_(values) {
        if (data_.empty()) throw InvalidArgument("vector dimension must be positive");
    }

    explicit Vector(std::vector<T> values) : data_(std::move(values)) {
        if (data_.empty()) throw InvalidArgument("vector dimension must be positive");
    }

    std::size_t dim() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    std::span<T> data() noexcept { return data_; }
    std::span<const T> data() const noexcept { return data_; }
    const std::vector<T>& values() const noexcept { return data_; }

    auto begin() noexcept { return data_.begin(); }
    auto end() noexcept { return data_.end(); }
    auto begin() const noexcept { return data_.begin(); }
    auto end() const noexcept { return data_.end(); }

    Vector& operator+=(const Vector& o) {
        require_same_dim(o, "+");
        for (std::size_t i = 0; i < dim(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    Vector& operator-=(const Vector& o) {
        require_same_dim(o, "-");
        for (std::size_t i = 0; i < dim(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    Vector& operator*=(const T& c) {
        for (auto& v : data_) v *= c;
        return *this;
    }

    friend Vector operator+(Vector a, const Vector& b) { return a += b; }
    friend Vector operator-(Vector a, const Vector& b) { return a -= b; }
    friend Vector operator*(Vector a, const T& c) { return a *= c; }
    friend Vector operator*(const T& c, Vector a) { return a *= c; }
    friend bool operator==(const Vector& a, const Vector& b) { return a.data_ == b.data_; }

private:
    void require_same_dim(const Vector& o, const char* op) const {
        if (dim() != o.dim()) {
            throw ShapeError(std::string("vector ") + op + ": dimensions " + std::to_string(dim()) +
                             " and " + std::to_string(o.dim()) + " differ");
        }
    }

    std::vector<T> data_;
};

template <typename T>
class Matrix {
public:
    using value_type = T;

    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, T fill = T(0))
        : rows_(rows), cols_(cols), data_(checked_size(rows, cols), fill) {}

    Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != checked_size(rows, cols)) {
            throw ShapeError("matrix data has " + std::to_string(data_.size()) + " entries, expected " +
                             std::to_string(rows) + "x" + std::to_string(cols));
        }
    }

    /// Row-wise literal: {{1, 2}, {3, 4}}.
    Matrix(std::initializer_list<std::initializer_list<T>> rows) {
        rows_ = rows.size();
        cols_ = rows_ == 0 ? 0 : rows.begin()->size();
        checked_size(rows_, cols_);
        data_.reserve(rows_ * cols_);
        std::size_t r = 0;
        for (const auto& row : rows) {
            ++r;
            if (row.size() != cols_) {
                throw ShapeError("row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                                 " entries, expected " + std::to_string(cols_));
            }
            data_.insert(data_.end(), row.begin(), row.end());
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    /// n x 1 matrix holding `v`.
    static Matrix column(const Vector<T>& v) { return Matrix(v.dim(), 1, v.values()); }

    /// 1 x n matrix holding `v`.
    static Matrix row_vector(const Vector<T>& v) { return Matrix(1, v.dim(), v.values()); }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<T> data() noexcept { return data_; }
    std::span<const T> data() const noexcept { return data_; }
    const std::vector<T>& values() const noexcept { return data_; }

    std::span<const T> row_span(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    Vector<T> row(std::size_t i) const {
        return Vector<T>(std::vector<T>(data_.begin() + i * cols_, data_.begin() + (i + 1) * cols_));
    }

    Vector<T> col(std::size_t j) const {
        std::vector<T> out(rows_);
        for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
        return Vector<T>(std::move(out));
    }

    /// Entries as a flat vector in row-stacking order.
    Vector<T> row_stack() const { return Vector<T>(data_); }

    Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Matrix& operator+=(const Matrix& o) {
        require_same_shape(o, "+");
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
        return *this;
    }
    Matrix& operator-=(const Matrix& o) {
        require_same_shape(o, "-");
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
        return *this;
    }
    Matrix& operator*=(const T& c) {
        for (auto& v : data_) v *= c;
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, const T& c) { return a *= c; }
    friend Matrix operator*(const T& c, Matrix a) { return a *= c; }

    // Summation order within each dot product is fixed (left to right).
    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_) {
            throw ShapeError("matrix product: " + a.shape() + " times " + b.shape());
        }
        Matrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const T aik = a(i, k);
                if (aik == T(0)) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
            }
        }
        return c;
    }

    friend Vector<T> operator*(const Matrix& a, const Vector<T>& x) {
        if (a.cols_ != x.dim()) {
            throw ShapeError("matrix-vector product: " + a.shape() + " times vector of dimension " +
                             std::to_string(x.dim()));
        }
        std::vector<T> y(a.rows_, T(0));
        for (std::size_t i = 0; i < a.rows_; ++i) {
            T acc(0);
            for (std::size_t k = 0; k < a.cols_; ++k) acc += a(i, k) * x[k];
            y[i] = acc;
        }
        return Vector<T>(std::move(y));
    }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

    std::string shape() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

private:
    static std::size_t checked_size(std::size_t rows, std::size_t cols) {
        if (rows == 0 || cols == 0) {
            throw InvalidArgument("matrix dimensions must be positive, got " + std::to_string(rows) + "x" +
                                  std::to_string(cols));
        }
        return checked_mul(rows, cols);
    }

    void require_same_shape(const Matrix& o, const char* op) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) {
            throw ShapeError(std::string("matrix ") + op + ": " + shape() + " and " + o.shape());
        }
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using Mat = Matrix<double>;
using Vec = Vector<double>;

/// Converts every entry with static_cast-like construction.
template <typename To, typename From>
Matrix<To> matrix_cast(const Matrix<From>& m) {
    std::vector<To> out;
    out.reserve(m.size());
    for (const auto& v : m.data()) out.push_back(To(v));
    return Matrix<To>(m.rows(), m.cols(), std::move(out));
}

template <typename T>
void require_finite(const Matrix<T>& m, const char* where) {
    if constexpr (std::is_floating_point_v<T>) {
        for (std::size_t i = 0; i < m.rows(); ++i)
            for (std::size_t j = 0; j < m.cols(); ++j)
                if (!std::isfinite(m(i, j))) {
                    throw NonFiniteError(std::string(where) + ": non-finite entry at (" + std::to_string(i + 1) +
                                         "," + std::to_string(j + 1) + ")");
                }
    }
}

template <typename T>
void require_finite(const Vector<T>& v, const char* where) {
    if constexpr (std::is_floating_point_v<T>) {
        for (std::size_t i = 0; i < v.dim(); ++i)
            if (!std::isfinite(v[i])) {
                throw NonFiniteError(std::string(where) + ": non-finite entry at position " + std::to_string(i + 1));
            }
    }
}

template <typename T>
std::ostream& operator<<(std::ostream& os, const Vector<T>& v) {
    os << '[';
    for (std::size_t i = 0; i < v.dim(); ++i) os << (i ? ", " : "") << v[i];
    return os << ']';
}

template <typename T>
std::ostream& operator<<(std::ostream& os, const Matrix<T>& m) {
    os << '[';
    for (std::size_t i = 0; i < m.rows(); ++i) {
        os << (i ? "; " : "");
        for (std::size_t j = 0; j < m.cols(); ++j) os << (j ? ", " : "") << m(i, j);
    }
    return os << ']';
}

}  // namespace stpdft
