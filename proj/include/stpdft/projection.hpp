#pragma once

// Inner-product geometry of the dimension-free space R^inf.
//
// Two vectors of dimensions m and n are compared after both are expanded to
// t = lcm(m, n) by entry replication; the inner product is averaged over t.
// Projection Pi^m_n is the least-distance map R^m -> R^n under this metric.

#include <cmath>
#include <cstddef>

#include "stpdft/core_algebra.hpp"

namespace stpdft {

/// <x, y>_V = (1/t) <x (x) 1_{t/m}, y (x) 1_{t/n}>.
template <typename T>
T vinner(const Vector<T>& x, const Vector<T>& y) {
    require_finite(x, "vinner");
    require_finite(y, "vinner");
    const std::size_t t = lcm(x.dim(), y.dim());
    const std::size_t rx = t / x.dim();
    const std::size_t ry = t / y.dim();
    T acc(0);
    for (std::size_t k = 0; k < t; ++k) acc += x[k / rx] * y[k / ry];
    return acc / T(static_cast<long long>(t));
}

template <typename T>
T vnorm(const Vector<T>& x) {
    using std::sqrt;
    return sqrt(vinner(x, x));
}

/// ||x - y||_V with the difference taken by semi-tensor subtraction.
template <typename T>
T vdist(const Vector<T>& x, const Vector<T>& y) {
    return vnorm(sta(x, y, StaSign::minus));
}

/// Pi^m_n, the n x m matrix of the least-distance projection R^m -> R^n.
///
/// Entry (i, j) is (n/t) times the overlap between the i-th block of t/n
/// slots and the j-th block of t/m slots in [0, t); every row sums to 1.
template <typename T = double>
Matrix<T> proj_matrix(std::size_t m, std::size_t n) {
    const std::size_t t = lcm(m, n);
    const std::size_t row_block = t / n;
    const std::size_t col_block = t / m;
    Matrix<T> out(n, m);
    const T scale = T(static_cast<long long>(n)) / T(static_cast<long long>(t));
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i * row_block;
        const std::size_t hi = lo + row_block;
        for (std::size_t j = lo / col_block; j < m && j * col_block < hi; ++j) {
            const std::size_t overlap = std::min(hi, (j + 1) * col_block) - std::max(lo, j * col_block);
            out(i, j) = scale * T(static_cast<long long>(overlap));
        }
    }
    return out;
}

/// pi^m_n(x) = Pi^m_n x.
template <typename T>
Vector<T> project(const Vector<T>& x, std::size_t n) {
    require_finite(x, "project");
    if (n == 0) throw InvalidArgument("project: target dimension must be positive");
    if (n == x.dim()) return x;
    return proj_matrix<T>(x.dim(), n) * x;
}

/// r-nominal addition x +_r y = Pi^m_r x + Pi^n_r y.
template <typename T>
Vector<T> nominal_add(const Vector<T>& x, const Vector<T>& y, std::size_t r) {
    return project(x, r) + project(y, r);
}

}  // namespace stpdft
