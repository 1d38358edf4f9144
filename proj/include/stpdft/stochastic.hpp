#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "stpdft/matrix.hpp"

namespace stpdft {

/// Additive mask value; the only non-finite entry softmax accepts.
inline constexpr double masked = -std::numeric_limits<double>::infinity();

/// Numerically stable softmax. Masked (-inf) entries map to exactly 0.
inline Vec softmax(const Vec& x) {
    double hi = masked;
    for (std::size_t i = 0; i < x.dim(); ++i) {
        if (std::isnan(x[i]) || x[i] == std::numeric_limits<double>::infinity()) {
            throw NonFiniteError("softmax: entry " + std::to_string(i + 1) + " is not a real number or -inf");
        }
        hi = std::max(hi, x[i]);
    }
    if (hi == masked) throw DegenerateRow("softmax: every entry is masked");
    std::vector<double> out(x.dim());
    double sum = 0.0;
    for (std::size_t i = 0; i < x.dim(); ++i) {
        out[i] = x[i] == masked ? 0.0 : std::exp(x[i] - hi);
        sum += out[i];
    }
    for (auto& v : out) v /= sum;
    return Vec(std::move(out));
}

/// Row-wise softmax; each output row is a stochastic vector.
inline Mat softmax_rows(const Mat& e) {
    Mat out(e.rows(), e.cols());
    for (std::size_t i = 0; i < e.rows(); ++i) {
        Vec r;
        try {
            r = softmax(e.row(i));
        } catch (const Error& err) {
            rethrow_with_context(err, "row " + std::to_string(i + 1));
        }
        for (std::size_t j = 0; j < e.cols(); ++j) out(i, j) = r[j];
    }
    return out;
}

/// Nonnegative entries summing to 1 (within `tol`).
template <typename T>
bool is_stochastic_vector(const Vector<T>& x, double tol = 1e-9) {
    T sum(0);
    for (const auto& v : x) {
        if (v < T(-tol)) return false;
        sum += v;
    }
    using std::abs;
    return abs(sum - T(1)) <= T(tol);
}

/// Every column is a stochastic vector.
template <typename T>
bool is_stochastic_matrix(const Matrix<T>& a, double tol = 1e-9) {
    for (std::size_t j = 0; j < a.cols(); ++j)
        if (!is_stochastic_vector(a.col(j), tol)) return false;
    return true;
}

}  // namespace stpdft
