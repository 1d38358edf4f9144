#pragma once

// Dimension-free matrix products and semi-tensor addition.
//
//   stp             (A (x) I_{t/n}) (B (x) I_{t/p})            t = lcm(n, p)
//   dk_stp          (A (x) 1^T_{t/n}) (B (x) 1_{t/p})          keeps m x q
//   weighted_dk_stp (A (x) 1^T_{t/n}) (B (x) 1_{t/p} / (t/p))
//   sta             (x (x) 1_{t/m}) +- (y (x) 1_{t/n})         t = lcm(m, n)
//
// for A in M(m x n), B in M(p x q). All of them reduce to the ordinary
// matrix product (or sum) when the inner dimensions agree.

#include <cstddef>
#include <numeric>
#include <string>

#include "stpdft/matrix.hpp"

namespace stpdft {

/// Least common multiple of two positive counts, overflow-checked.
inline std::size_t lcm(std::size_t a, std::size_t b) {
    if (a == 0 || b == 0) {
        throw InvalidArgument("lcm: arguments must be positive, got " + std::to_string(a) + ", " + std::to_string(b));
    }
    return checked_mul(a / std::gcd(a, b), b);
}

template <typename T = double>
Matrix<T> ones(std::size_t rows, std::size_t cols) {
    return Matrix<T>(rows, cols, T(1));
}

template <typename T>
Matrix<T> kron(const Matrix<T>& a, const Matrix<T>& b) {
    const std::size_t rows = checked_mul(a.rows(), b.rows());
    const std::size_t cols = checked_mul(a.cols(), b.cols());
    checked_mul(rows, cols);
    Matrix<T> out(rows, cols);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const T aij = a(i, j);
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
    }
    return out;
}

template <typename T>
Vector<T> kron(const Vector<T>& a, const Vector<T>& b) {
    std::vector<T> out;
    out.reserve(checked_mul(a.dim(), b.dim()));
    for (const auto& ai : a)
        for (const auto& bj : b) out.push_back(ai * bj);
    return Vector<T>(std::move(out));
}

/// x (x) 1_k: every entry of x repeated k times in place.
template <typename T>
Vector<T> replicate(const Vector<T>& x, std::size_t k) {
    std::vector<T> out;
    out.reserve(checked_mul(x.dim(), k));
    for (const auto& v : x)
        for (std::size_t r = 0; r < k; ++r) out.push_back(v);
    return Vector<T>(std::move(out));
}

/// MM-STP (left semi-tensor product).
template <typename T>
Matrix<T> stp(const Matrix<T>& a, const Matrix<T>& b) {
    require_finite(a, "stp");
    require_finite(b, "stp");
    const std::size_t t = lcm(a.cols(), b.rows());
    if (t == a.cols() && t == b.rows()) return a * b;
    return kron(a, Matrix<T>::identity(t / a.cols())) * kron(b, Matrix<T>::identity(t / b.rows()));
}

/// MM-STP of a matrix with a column vector.
template <typename T>
Vector<T> stp(const Matrix<T>& a, const Vector<T>& x) {
    return stp(a, Matrix<T>::column(x)).col(0);
}

/// Dimension-keeping STP; the result is a.rows() x b.cols().
template <typename T>
Matrix<T> dk_stp(const Matrix<T>& a, const Matrix<T>& b) {
    require_finite(a, "dk_stp");
    require_finite(b, "dk_stp");
    const std::size_t t = lcm(a.cols(), b.rows());
    if (t == a.cols() && t == b.rows()) return a * b;
    return kron(a, ones<T>(1, t / a.cols())) * kron(b, ones<T>(t / b.rows(), 1));
}

template <typename T>
Vector<T> dk_stp(const Matrix<T>& a, const Vector<T>& x) {
    return dk_stp(a, Matrix<T>::column(x)).col(0);
}

/// Bridge matrix Psi_{n x p} = (I_n (x) 1^T_{t/n}) (I_p (x) 1_{t/p}), so that
/// dk_stp(A, B) == A * Psi * B.
template <typename T = double>
Matrix<T> bridge_matrix(std::size_t n, std::size_t p) {
    const std::size_t t = lcm(n, p);
    return kron(Matrix<T>::identity(n), ones<T>(1, t / n)) * kron(Matrix<T>::identity(p), ones<T>(t / p, 1));
}

/// Psi^w_{n x p} = bridge_matrix(n, p) / (t/p).
template <typename T = double>
Matrix<T> weighted_bridge_matrix(std::size_t n, std::size_t p) {
    const std::size_t t = lcm(n, p);
    return bridge_matrix<T>(n, p) * (T(1) / T(static_cast<long long>(t / p)));
}

/// Weighted DK-STP; preserves column stochasticity.
template <typename T>
Matrix<T> weighted_dk_stp(const Matrix<T>& a, const Matrix<T>& b) {
    require_finite(a, "weighted_dk_stp");
    require_finite(b, "weighted_dk_stp");
    const std::size_t t = lcm(a.cols(), b.rows());
    if (t == a.cols() && t == b.rows()) return a * b;
    const std::size_t k = t / b.rows();
    Matrix<T> expand = ones<T>(k, 1) * (T(1) / T(static_cast<long long>(k)));
    return kron(a, ones<T>(1, t / a.cols())) * kron(b, expand);
}

template <typename T>
Vector<T> weighted_dk_stp(const Matrix<T>& a, const Vector<T>& x) {
    return weighted_dk_stp(a, Matrix<T>::column(x)).col(0);
}

enum class StaSign { plus, minus };

/// Semi-tensor addition / subtraction; the result has dimension lcm(m, n).
template <typename T>
Vector<T> sta(const Vector<T>& x, const Vector<T>& y, StaSign sign = StaSign::plus) {
    require_finite(x, "sta");
    require_finite(y, "sta");
    const std::size_t t = lcm(x.dim(), y.dim());
    Vector<T> lhs = replicate(x, t / x.dim());
    const Vector<T> rhs = replicate(y, t / y.dim());
    return sign == StaSign::plus ? (lhs += rhs) : (lhs -= rhs);
}

}  // namespace stpdft
