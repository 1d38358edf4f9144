#pragma once

// Hypervectors: ordered lists of vectors whose dimensions may differ.
//
// A hypervector X = {x^1, ..., x^s} with x^i in R^{n_i} has three
// interchangeable views:
//   pseudo-matrix   ragged rows, used for printing only
//   addition form   V_X = [x^1; ...; x^s], length sum n_i
//   product form    x^1 (x) ... (x) x^s,   length prod n_i
//
// The diamond operator A <> X lets a batch-mixing matrix A act on a ragged
// batch: project every row to a nominal dimension n_0, multiply by A, and
// project each row back to its own dimension.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "stpdft/projection.hpp"

namespace stpdft {

using Dims = std::vector<std::size_t>;

inline std::string dims_str(const Dims& dims) {
    std::string s = "{";
    for (std::size_t i = 0; i < dims.size(); ++i) s += (i ? "," : "") + std::to_string(dims[i]);
    return s + "}";
}

template <typename T>
class HyperVector {
public:
    using value_type = T;

    HyperVector() = default;

    explicit HyperVector(std::vector<Vector<T>> components) : comps_(std::move(components)) {
        if (comps_.empty()) throw InvalidArgument("hypervector must have at least one component");
        for (std::size_t i = 0; i < comps_.size(); ++i)
            if (comps_[i].dim() == 0) {
                throw InvalidArgument("hypervector component " + std::to_string(i + 1) + " is empty");
            }
    }

    HyperVector(std::initializer_list<std::initializer_list<T>> rows) {
        for (const auto& r : rows) comps_.emplace_back(std::vector<T>(r));
        if (comps_.empty()) throw InvalidArgument("hypervector must have at least one component");
    }

    /// Homogeneous hypervector whose components are the rows of `m`.
    static HyperVector from_rows(const Matrix<T>& m) {
        std::vector<Vector<T>> comps;
        comps.reserve(m.rows());
        for (std::size_t i = 0; i < m.rows(); ++i) comps.push_back(m.row(i));
        return HyperVector(std::move(comps));
    }

    static HyperVector zeros(const Dims& dims) {
        std::vector<Vector<T>> comps;
        for (auto d : dims) comps.emplace_back(d);
        return HyperVector(std::move(comps));
    }

    /// Batch size s.
    std::size_t size() const noexcept { return comps_.size(); }

    Dims dims() const {
        Dims d;
        d.reserve(comps_.size());
        for (const auto& c : comps_) d.push_back(c.dim());
        return d;
    }

    std::size_t max_dim() const {
        std::size_t m = 0;
        for (const auto& c : comps_) m = std::max(m, c.dim());
        return m;
    }

    bool is_homogeneous() const {
        return std::all_of(comps_.begin(), comps_.end(), [&](const auto& c) { return c.dim() == comps_[0].dim(); });
    }

    /// The s x n_0 matrix of a homogeneous hypervector.
    Matrix<T> to_matrix() const {
        if (!is_homogeneous()) throw ShapeError("to_matrix: hypervector with dims " + dims_str(dims()) + " is ragged");
        const std::size_t n = comps_[0].dim();
        Matrix<T> m(comps_.size(), n);
        for (std::size_t i = 0; i < comps_.size(); ++i)
            for (std::size_t j = 0; j < n; ++j) m(i, j) = comps_[i][j];
        return m;
    }

    Vector<T>& operator[](std::size_t i) { return comps_[i]; }
    const Vector<T>& operator[](std::size_t i) const { return comps_[i]; }
    const std::vector<Vector<T>>& components() const noexcept { return comps_; }

    auto begin() const noexcept { return comps_.begin(); }
    auto end() const noexcept { return comps_.end(); }

    friend bool operator==(const HyperVector& a, const HyperVector& b) { return a.comps_ == b.comps_; }

private:
    std::vector<Vector<T>> comps_;
};

using HyperVec = HyperVector<double>;

/// Pseudo-matrix rendering: one ragged row per component.
template <typename T>
std::ostream& operator<<(std::ostream& os, const HyperVector<T>& x) {
    os << '{';
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? "; " : "") << x[i];
    return os << '}';
}

template <typename T>
Vector<T> to_addition_form(const HyperVector<T>& x) {
    std::vector<T> out;
    for (const auto& c : x) out.insert(out.end(), c.begin(), c.end());
    return Vector<T>(std::move(out));
}

template <typename T>
HyperVector<T> from_addition_form(const Vector<T>& v, const Dims& dims) {
    if (dims.empty()) throw InvalidArgument("from_addition_form: empty dimension list");
    std::size_t total = 0;
    for (auto d : dims) {
        if (d == 0) throw InvalidArgument("from_addition_form: dimensions must be positive");
        total += d;
    }
    if (total != v.dim()) {
        throw ShapeError("from_addition_form: vector of dimension " + std::to_string(v.dim()) +
                         " does not match dims " + dims_str(dims) + " (sum " + std::to_string(total) + ")");
    }
    std::vector<Vector<T>> comps;
    std::size_t offset = 0;
    for (auto d : dims) {
        comps.emplace_back(std::vector<T>(v.begin() + offset, v.begin() + offset + d));
        offset += d;
    }
    return HyperVector<T>(std::move(comps));
}

/// Iterated STP of the components; for column vectors this is the Kronecker product.
template <typename T>
Vector<T> to_product_form(const HyperVector<T>& x, std::size_t budget = default_size_budget) {
    std::size_t total = 1;
    for (const auto& c : x) total = checked_mul(total, c.dim(), budget);
    Vector<T> acc = x[0];
    for (std::size_t i = 1; i < x.size(); ++i) acc = kron(acc, x[i]);
    return acc;
}

/// Recovers the unique normalized (nonnegative, unit-sum) factors of a product-form vector.
///
/// The vector is reshaped to n_1 x (prod rest); the first factor is the
/// normalized row-sum profile and the remainder is the column-sum profile.
/// Throws NonFactorizable when a reshaped slice is not rank one within
/// `rel_tol` of its largest entry, or when the vector cannot be normalized.
template <typename T>
HyperVector<T> factor_product_form(const Vector<T>& x, const Dims& dims, double rel_tol = 1e-6) {
    require_finite(x, "factor_product_form");
    std::size_t total = 1;
    for (auto d : dims) {
        if (d == 0) throw InvalidArgument("factor_product_form: dimensions must be positive");
        total = checked_mul(total, d);
    }
    if (dims.empty() || total != x.dim()) {
        throw ShapeError("factor_product_form: vector of dimension " + std::to_string(x.dim()) +
                         " does not match dims " + dims_str(dims));
    }
    T scale(0);
    for (const auto& v : x) {
        if (v < T(0)) throw NonFactorizable("factor_product_form: negative entry; factors must be nonnegative");
        scale = std::max(scale, v);
    }
    if (scale == T(0)) throw NonFactorizable("factor_product_form: zero vector has no normalized factors");

    std::vector<Vector<T>> factors;
    std::vector<T> rest(x.begin(), x.end());
    for (std::size_t f = 0; f + 1 < dims.size(); ++f) {
        const std::size_t rows = dims[f];
        const std::size_t cols = rest.size() / rows;
        std::vector<T> row_sum(rows, T(0));
        std::vector<T> col_sum(cols, T(0));
        T sum(0);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) {
                row_sum[i] += rest[i * cols + j];
                col_sum[j] += rest[i * cols + j];
            }
        for (const auto& r : row_sum) sum += r;
        if (!(sum > T(0))) throw NonFactorizable("factor_product_form: slice " + std::to_string(f + 1) + " sums to zero");
        for (auto& r : row_sum) r /= sum;
        // rank-one check: rest(i, j) == row_sum[i] * col_sum[j]
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) {
                using std::abs;
                const T diff = abs(rest[i * cols + j] - row_sum[i] * col_sum[j]);
                if (diff > T(rel_tol) * scale) {
                    throw NonFactorizable("factor_product_form: slice " + std::to_string(f + 1) +
                                          " is not rank one at (" + std::to_string(i + 1) + "," +
                                          std::to_string(j + 1) + ")");
                }
            }
        factors.emplace_back(std::move(row_sum));
        rest = std::move(col_sum);
    }
    T sum(0);
    for (const auto& v : rest) sum += v;
    if (!(sum > T(0))) throw NonFactorizable("factor_product_form: last factor sums to zero");
    for (auto& v : rest) v /= sum;
    factors.emplace_back(std::move(rest));
    return HyperVector<T>(std::move(factors));
}

/// X +_r Y as a k x r matrix, k = lcm(s, t); components are replicated
/// (X (x) 1_{k/s}, Y (x) 1_{k/t}) before row-wise r-nominal addition.
template <typename T>
Matrix<T> hyper_add(const HyperVector<T>& x, const HyperVector<T>& y, std::size_t r) {
    if (r == 0) throw InvalidArgument("hyper_add: target dimension must be positive");
    const std::size_t k = lcm(x.size(), y.size());
    const std::size_t rx = k / x.size();
    const std::size_t ry = k / y.size();
    Matrix<T> out(k, r);
    for (std::size_t i = 0; i < k; ++i) {
        const Vector<T> z = nominal_add(x[i / rx], y[i / ry], r);
        for (std::size_t j = 0; j < r; ++j) out(i, j) = z[j];
    }
    return out;
}

/// X +_r Y with a per-component target dimension r_i.
template <typename T>
HyperVector<T> hyper_add_listwise(const HyperVector<T>& x, const HyperVector<T>& y, const Dims& r) {
    if (x.size() != y.size() || x.size() != r.size()) {
        throw ShapeError("hyper_add_listwise: batch sizes " + std::to_string(x.size()) + ", " +
                         std::to_string(y.size()) + " and target list of length " + std::to_string(r.size()) +
                         " must agree");
    }
    std::vector<Vector<T>> out;
    out.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out.push_back(nominal_add(x[i], y[i], r[i]));
    return HyperVector<T>(std::move(out));
}

/// (X . Y)(i, j) = <x^i, y^j>_V.
template <typename T>
Matrix<T> hyper_inner(const HyperVector<T>& x, const HyperVector<T>& y) {
    Matrix<T> out(x.size(), y.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < y.size(); ++j) out(i, j) = vinner(x[i], y[j]);
    return out;
}

/// W(i, j) = sqrt(lcm(m_i, n_j)).
inline Mat inner_weight_matrix(const Dims& x_dims, const Dims& y_dims) {
    Mat w(x_dims.size(), y_dims.size());
    for (std::size_t i = 0; i < x_dims.size(); ++i)
        for (std::size_t j = 0; j < y_dims.size(); ++j) w(i, j) = std::sqrt(static_cast<double>(lcm(x_dims[i], y_dims[j])));
    return w;
}

/// Weighted inner product (X . Y) o W; reduces to X Y^T / sqrt(d) for uniform dimension d.
inline Mat hyper_inner_weighted(const HyperVec& x, const HyperVec& y) {
    Mat out = hyper_inner(x, y);
    const Mat w = inner_weight_matrix(x.dims(), y.dims());
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) *= w(i, j);
    return out;
}

/// Block-diagonal matrix with the given blocks on the diagonal.
template <typename T>
Matrix<T> block_diagonal(const std::vector<Matrix<T>>& blocks) {
    std::size_t rows = 0, cols = 0;
    for (const auto& b : blocks) {
        rows += b.rows();
        cols += b.cols();
    }
    Matrix<T> out(rows, cols);
    std::size_t r0 = 0, c0 = 0;
    for (const auto& b : blocks) {
        for (std::size_t i = 0; i < b.rows(); ++i)
            for (std::size_t j = 0; j < b.cols(); ++j) out(r0 + i, c0 + j) = b(i, j);
        r0 += b.rows();
        c0 += b.cols();
    }
    return out;
}

/// Precomputed projections for A <> X over a fixed dimension profile.
///
/// Maps an input profile n_1..n_s through nominal dimension n_0 to an output
/// profile (by default the input profile). Immutable once built.
template <typename T = double>
class DiamondPlan {
public:
    DiamondPlan(Dims in_dims, std::size_t nominal_dim) : DiamondPlan(in_dims, nominal_dim, in_dims) {}

    DiamondPlan(Dims in_dims, std::size_t nominal_dim, Dims out_dims)
        : in_dims_(std::move(in_dims)), out_dims_(std::move(out_dims)), n0_(nominal_dim) {
        if (in_dims_.empty() || out_dims_.empty()) throw InvalidArgument("DiamondPlan: empty dimension list");
        if (n0_ == 0) throw InvalidArgument("DiamondPlan: nominal dimension must be positive");
        for (auto d : in_dims_) pad_.push_back(proj_matrix<T>(d, n0_));
        for (auto d : out_dims_) unpad_.push_back(proj_matrix<T>(n0_, d));
    }

    const Dims& input_dims() const noexcept { return in_dims_; }
    const Dims& output_dims() const noexcept { return out_dims_; }
    std::size_t nominal_dim() const noexcept { return n0_; }

    /// Block (i): Pi^{n_i}_{n_0}.
    const Matrix<T>& pad_block(std::size_t i) const { return pad_.at(i); }
    /// Block (i): Pi^{n_0}_{n_i}.
    const Matrix<T>& unpad_block(std::size_t i) const { return unpad_.at(i); }

    /// T_pad, (s n_0) x (sum n_i).
    Matrix<T> padding_map() const { return block_diagonal(pad_); }
    /// T_unpad, (sum n_i) x (s n_0).
    Matrix<T> unpadding_map() const { return block_diagonal(unpad_); }

    /// Step 1: the s x n_0 project-padded matrix.
    Matrix<T> pad(const HyperVector<T>& x) const {
        require_profile(x);
        Matrix<T> out(x.size(), n0_);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const Vector<T> row = pad_[i] * x[i];
            for (std::size_t j = 0; j < n0_; ++j) out(i, j) = row[j];
        }
        return out;
    }

    /// Step 3: project each row of an (out batch) x n_0 matrix to its output dimension.
    HyperVector<T> unpad(const Matrix<T>& m) const {
        if (m.rows() != out_dims_.size() || m.cols() != n0_) {
            throw ShapeError("DiamondPlan::unpad: expected " + std::to_string(out_dims_.size()) + "x" +
                             std::to_string(n0_) + ", got " + m.shape());
        }
        std::vector<Vector<T>> comps;
        for (std::size_t i = 0; i < m.rows(); ++i) comps.push_back(unpad_[i] * m.row(i));
        return HyperVector<T>(std::move(comps));
    }

    /// Stepwise A <> X: pad, multiply, unpad.
    HyperVector<T> apply(const Matrix<T>& a, const HyperVector<T>& x) const {
        require_mixer(a);
        require_finite(a, "diamond");
        return unpad(a * pad(x));
    }

    /// Vectorized A <> X: T_unpad (A (x) I_{n_0}) T_pad V_X, in addition form.
    Vector<T> apply_vectorized(const Matrix<T>& a, const HyperVector<T>& x) const {
        require_mixer(a);
        require_profile(x);
        require_finite(a, "diamond");
        const Matrix<T> mix = kron(a, Matrix<T>::identity(n0_));
        return unpadding_map() * (mix * (padding_map() * to_addition_form(x)));
    }

private:
    void require_profile(const HyperVector<T>& x) const {
        if (x.dims() != in_dims_) {
            throw ShapeError("DiamondPlan: hypervector dims " + dims_str(x.dims()) + " do not match plan dims " +
                             dims_str(in_dims_));
        }
    }
    void require_mixer(const Matrix<T>& a) const {
        if (a.rows() != out_dims_.size() || a.cols() != in_dims_.size()) {
            throw ShapeError("diamond: mixing matrix " + a.shape() + " does not fit batch " +
                             std::to_string(in_dims_.size()) + " -> " + std::to_string(out_dims_.size()));
        }
    }

    Dims in_dims_;
    Dims out_dims_;
    std::size_t n0_;
    std::vector<Matrix<T>> pad_;
    std::vector<Matrix<T>> unpad_;
};

/// A <> X with nominal dimension n_0 (default: the largest component dimension).
template <typename T>
HyperVector<T> diamond(const Matrix<T>& a, const HyperVector<T>& x, std::optional<std::size_t> nominal_dim = {}) {
    if (a.rows() != x.size() || a.cols() != x.size()) {
        throw ShapeError("diamond: matrix " + a.shape() + " does not match batch size " + std::to_string(x.size()));
    }
    return DiamondPlan<T>(x.dims(), nominal_dim.value_or(x.max_dim())).apply(a, x);
}

template <typename T>
Vector<T> diamond_vectorized(const Matrix<T>& a, const HyperVector<T>& x,
                             std::optional<std::size_t> nominal_dim = {}) {
    if (a.rows() != x.size() || a.cols() != x.size()) {
        throw ShapeError("diamond: matrix " + a.shape() + " does not match batch size " + std::to_string(x.size()));
    }
    return DiamondPlan<T>(x.dims(), nominal_dim.value_or(x.max_dim())).apply_vectorized(a, x);
}

/// (W (x) I_c) V_r(Y) with c = Y.cols(); equals V_r(W Y).
template <typename T>
Vector<T> qkv_vectorized(const Matrix<T>& w, const Matrix<T>& right) {
    if (w.cols() != right.rows()) {
        throw ShapeError("qkv_vectorized: " + w.shape() + " cannot act on " + right.shape());
    }
    return kron(w, Matrix<T>::identity(right.cols())) * right.row_stack();
}

}  // namespace stpdft
