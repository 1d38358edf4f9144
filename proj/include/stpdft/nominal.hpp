#pragma once

// Classical transformer pieces on homogeneous batches.
//
// Batches are s x n matrices with one token vector per row. Feature-side
// weights follow Q^T = W X^T, i.e. Q = X W^T with W in M(n x n).

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "stpdft/hypervector.hpp"
#include "stpdft/stochastic.hpp"

namespace stpdft {

/// Attention-score denominator: sqrt(n) (feature dim), sqrt(s) (batch size), or n.
enum class ScaleMode { sqrt_dim, sqrt_batch, dim };

/// `causal` masks j > i; `literal` masks j <= i.
enum class MaskMode { none, causal, literal };

/// `feature`: W is n x n and acts on every token vector.
/// `batch`:   W is s x s and mixes the rows of the batch.
enum class WeightConvention { feature, batch };

enum class NormMode { vector_wise, layer_wise };

struct AttentionOptions {
    ScaleMode scale = ScaleMode::sqrt_dim;
    MaskMode mask = MaskMode::none;
};

struct NormParams {
    NormMode mode = NormMode::vector_wise;
    double gamma = 1.0;
    double beta = 0.0;
    double epsilon = 1e-3;
};

/// Sinusoidal position matrix, s x d: P(pos, 2i) = sin(pos / 10000^{2i/d}),
/// P(pos, 2i+1) = cos(pos / 10000^{2i/d}) (0-based).
inline Mat positional_encoding(std::size_t s, std::size_t d) {
    if (s == 0 || d == 0 || d % 2 != 0) {
        throw InvalidArgument("positional_encoding: need s >= 1 and even d >= 2, got s=" + std::to_string(s) +
                              ", d=" + std::to_string(d));
    }
    Mat p(s, d);
    for (std::size_t pos = 0; pos < s; ++pos) {
        for (std::size_t i = 0; i < d / 2; ++i) {
            const double angle =
                static_cast<double>(pos) / std::pow(10000.0, static_cast<double>(2 * i) / static_cast<double>(d));
            p(pos, 2 * i) = std::sin(angle);
            p(pos, 2 * i + 1) = std::cos(angle);
        }
    }
    return p;
}

inline Mat pe_apply(const Mat& x) { return x + positional_encoding(x.rows(), x.cols()); }

/// Applies a weight under the given convention.
inline Mat apply_weight(const Mat& w, const Mat& x, WeightConvention conv) {
    if (conv == WeightConvention::feature) {
        if (w.rows() != x.cols() || w.cols() != x.cols()) {
            throw ShapeError("feature weight " + w.shape() + " does not act on batch " + x.shape());
        }
        return x * w.transpose();
    }
    if (w.cols() != x.rows()) throw ShapeError("batch weight " + w.shape() + " does not act on batch " + x.shape());
    return w * x;
}

struct Qkv {
    Mat q, k, v;
};

inline Qkv qkv_nominal(const Mat& x, const Mat& wq, const Mat& wk, const Mat& wv,
                       WeightConvention conv = WeightConvention::feature) {
    require_finite(x, "qkv_nominal");
    return {apply_weight(wq, x, conv), apply_weight(wk, x, conv), apply_weight(wv, x, conv)};
}

/// Additive rows x cols mask; masked entries hold -inf.
inline Mat causal_mask(std::size_t rows, std::size_t cols, MaskMode mode) {
    Mat m(rows, cols);
    if (mode == MaskMode::none) return m;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            const bool future = j > i;
            if (mode == MaskMode::causal ? future : !future) m(i, j) = masked;
        }
    return m;
}

inline Mat causal_mask(std::size_t s, MaskMode mode = MaskMode::causal) { return causal_mask(s, s, mode); }

inline double scale_denominator(ScaleMode mode, std::size_t dim, std::size_t batch) {
    switch (mode) {
        case ScaleMode::sqrt_dim: return std::sqrt(static_cast<double>(dim));
        case ScaleMode::sqrt_batch: return std::sqrt(static_cast<double>(batch));
        case ScaleMode::dim: return static_cast<double>(dim);
    }
    return 1.0;
}

/// Softmax after adding a mask (which may hold -inf entries).
inline Mat masked_softmax(const Mat& scores, MaskMode mode) {
    if (mode == MaskMode::none) return softmax_rows(scores);
    Mat e = scores;
    const Mat m = causal_mask(scores.rows(), scores.cols(), mode);
    for (std::size_t i = 0; i < e.rows(); ++i)
        for (std::size_t j = 0; j < e.cols(); ++j)
            if (m(i, j) == masked) e(i, j) = masked;
    return softmax_rows(e);
}

struct Attention {
    Mat weights;  // s x s, stochastic rows
    Mat values;   // V' = weights * V
};

/// V' = softmax(Q K^T / scale + mask) V.
inline Attention attention_nominal(const Mat& q, const Mat& k, const Mat& v, AttentionOptions opts = {}) {
    if (q.cols() != k.cols() || k.rows() != v.rows()) {
        throw ShapeError("attention_nominal: Q " + q.shape() + ", K " + k.shape() + ", V " + v.shape());
    }
    require_finite(q, "attention_nominal");
    require_finite(k, "attention_nominal");
    require_finite(v, "attention_nominal");
    Mat scores = q * k.transpose();
    scores *= 1.0 / scale_denominator(opts.scale, q.cols(), q.rows());
    Mat a = masked_softmax(scores, opts.mask);
    Mat out = a * v;
    return {std::move(a), std::move(out)};
}

/// Per-head token maps, each r_i x n (query and key maps share their row count).
struct HeadMaps {
    Mat tq, tk, tv;
};

/// Multi-head attention with STP concatenation.
///
/// Head i attends over (Q T_q^T, K T_k^T, V T_v^T); row j of the concatenation
/// is the Kronecker product of the heads' row j (dimension r = prod r_i), and
/// the output map M_W in M((r_0 s) x (r s)) acts on its row-stacking. The
/// result is s x r_0.
inline Mat multi_head_nominal(const Mat& v, const Mat& k, const Mat& q, const std::vector<HeadMaps>& heads,
                              const Mat& output_map, AttentionOptions opts = {},
                              std::size_t budget = default_size_budget) {
    if (heads.empty()) throw InvalidArgument("multi_head_nominal: need at least one head");
    const std::size_t s = q.rows();
    std::vector<Mat> outs;
    std::size_t r = 1;
    for (std::size_t h = 0; h < heads.size(); ++h) {
        try {
            const Mat qh = q * heads[h].tq.transpose();
            const Mat kh = k * heads[h].tk.transpose();
            const Mat vh = v * heads[h].tv.transpose();
            outs.push_back(attention_nominal(qh, kh, vh, opts).values);
        } catch (const Error& e) {
            rethrow_with_context(e, "head " + std::to_string(h + 1));
        }
        r = checked_mul(r, outs.back().cols(), budget);
    }
    checked_mul(r, s, budget);
    Mat concat(s, r);
    for (std::size_t j = 0; j < s; ++j) {
        Vec row = outs[0].row(j);
        for (std::size_t h = 1; h < outs.size(); ++h) row = kron(row, outs[h].row(j));
        for (std::size_t c = 0; c < r; ++c) concat(j, c) = row[c];
    }
    if (output_map.cols() != r * s || output_map.rows() % s != 0) {
        throw ShapeError("multi_head_nominal: output map " + output_map.shape() + " does not act on concat " +
                         concat.shape() + " (needs (r0*" + std::to_string(s) + ")x" + std::to_string(r * s) + ")");
    }
    const Vec flat = output_map * concat.row_stack();
    return Mat(s, output_map.rows() / s, flat.values());
}

inline double relu(double x) { return x > 0.0 ? x : 0.0; }

inline Vec relu(Vec x) {
    for (auto& v : x) v = relu(v);
    return x;
}

inline Mat relu(Mat x) {
    for (auto& v : x.data()) v = relu(v);
    return x;
}

namespace detail {

// y = (x - E) / sqrt(Var + eps) * gamma + beta over a group of entries,
// with E the mean and Var = (1/d) sqrt(sum (x - E)^2).
inline void normalize_group(std::span<double> xs, const NormParams& p) {
    const double d = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double v : xs) mean += v;
    mean /= d;
    double sq = 0.0;
    for (double v : xs) sq += (v - mean) * (v - mean);
    const double var = std::sqrt(sq) / d;
    const double denom = std::sqrt(var + p.epsilon);
    for (double& v : xs) v = (v - mean) / denom * p.gamma + p.beta;
}

}  // namespace detail

/// Vector-wise normalizes every row; layer-wise pools all entries.
inline Mat normalize(Mat x, const NormParams& p) {
    if (!(p.epsilon > 0.0)) throw InvalidArgument("normalize: epsilon must be positive");
    if (p.mode == NormMode::layer_wise) {
        detail::normalize_group(x.data(), p);
    } else {
        for (std::size_t i = 0; i < x.rows(); ++i) detail::normalize_group(x.data().subspan(i * x.cols(), x.cols()), p);
    }
    return x;
}

/// normalize(ReLU(X + F)).
inline Mat add_norm(const Mat& x, const Mat& f, const NormParams& p = {}) {
    if (x.rows() != f.rows() || x.cols() != f.cols()) {
        throw ShapeError("add_norm: X " + x.shape() + " and F(X) " + f.shape());
    }
    return normalize(relu(x + f), p);
}

/// Feed-forward weights: W1 in M(alpha x s), W2 in M(beta x alpha).
/// Bias rows may have any dimension; they enter by nominal addition.
struct FfnWeights {
    Mat w1;
    std::optional<HyperVec> b1;
    Mat w2;
    std::optional<HyperVec> b2;
};

namespace detail {

inline Mat add_bias_rows(Mat h, const HyperVec& b, const char* name) {
    if (b.size() != h.rows()) {
        throw ShapeError(std::string("ffn: bias ") + name + " has " + std::to_string(b.size()) + " rows, expected " +
                         std::to_string(h.rows()));
    }
    for (std::size_t i = 0; i < h.rows(); ++i) {
        const Vec z = nominal_add(h.row(i), b[i], h.cols());
        for (std::size_t j = 0; j < h.cols(); ++j) h(i, j) = z[j];
    }
    return h;
}

}  // namespace detail

/// FFN(X) = W2 ReLU(W1 X + B1) + B2, the bias additions being row-wise
/// nominal additions into the row dimension of X.
inline Mat ffn_nominal(const Mat& x, const FfnWeights& w) {
    require_finite(x, "ffn_nominal");
    if (w.w1.cols() != x.rows() || w.w2.cols() != w.w1.rows()) {
        throw ShapeError("ffn_nominal: X " + x.shape() + ", W1 " + w.w1.shape() + ", W2 " + w.w2.shape());
    }
    Mat h = w.w1 * x;
    if (w.b1) h = detail::add_bias_rows(std::move(h), *w.b1, "B1");
    h = w.w2 * relu(std::move(h));
    if (w.b2) h = detail::add_bias_rows(std::move(h), *w.b2, "B2");
    return h;
}

/// V' = softmax(X Wq^T Wk X^T X Wv^T), softmax applied row-wise last.
inline Mat assembled_attention(const Mat& x, const Mat& wq, const Mat& wk, const Mat& wv) {
    const std::size_t n = x.cols();
    for (const Mat* w : {&wq, &wk, &wv})
        if (w->rows() != n || w->cols() != n) {
            throw ShapeError("assembled_attention: weight " + w->shape() + " does not fit X " + x.shape());
        }
    require_finite(x, "assembled_attention");
    const Mat wqk = wq.transpose() * wk;
    return softmax_rows(x * wqk * x.transpose() * x * wv.transpose());
}

}  // namespace stpdft
