#pragma once

// Dimension-free transformer: every stage accepts ragged batches
// (hypervectors) and keeps each sequence at its own dimension.
//
//   QKV maps        zero_pad_pipeline / proj_pad_pipeline
//   attention       A = softmax(Q .w K), output A <> V
//   multi-head      componentwise nominal-addition concat + per-row maps
//   add & norm      z^i = Pi^{n_i}_{m_i} x^i + f^i, ReLU, normalize
//   feed-forward    W2 <> ReLU(W1 <> X +_n B1) +_n B2

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "stpdft/hypervector.hpp"
#include "stpdft/nominal.hpp"
#include "stpdft/stochastic.hpp"

namespace stpdft {

enum class PaddingMode { zero, projection };

inline HyperVec relu(HyperVec x) {
    std::vector<Vec> comps;
    for (const auto& c : x) comps.push_back(relu(c));
    return HyperVec(std::move(comps));
}

namespace detail {

inline void require_batch(const HyperVec& x, std::size_t n, const char* what, const char* where) {
    if (x.size() != n) {
        throw ShapeError(std::string(where) + ": " + what + " has batch size " + std::to_string(x.size()) +
                         ", expected " + std::to_string(n));
    }
}

}  // namespace detail

/// Zero-padding QKV map: pad every x^i with zeros to d = W.rows(), compute
/// q~^i = W x~^i, keep the first m_i entries.
inline HyperVec zero_pad_pipeline(const HyperVec& x, const Mat& w, const Dims& dims_out) {
    const std::size_t d = w.rows();
    if (w.cols() != d) throw ShapeError("zero_pad_pipeline: weight " + w.shape() + " is not square");
    if (dims_out.size() != x.size()) {
        throw ShapeError("zero_pad_pipeline: " + std::to_string(dims_out.size()) + " output dims for batch size " +
                         std::to_string(x.size()));
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i].dim() > d || dims_out[i] > d || dims_out[i] == 0) {
            throw ShapeError("zero_pad_pipeline: weight " + w.shape() + " cannot hold sequence " +
                             std::to_string(i + 1) + " (in " + std::to_string(x[i].dim()) + ", out " +
                             std::to_string(dims_out[i]) + ")");
        }
    }
    Mat padded(x.size(), d);
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < x[i].dim(); ++j) padded(i, j) = x[i][j];
    require_finite(padded, "zero_pad_pipeline");
    const Mat q = padded * w.transpose();
    std::vector<Vec> comps;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto row = q.row_span(i);
        comps.emplace_back(std::vector<double>(row.begin(), row.begin() + dims_out[i]));
    }
    return HyperVec(std::move(comps));
}

/// Projection-padding QKV map: x~^i = Pi^{n_i}_d x^i, Q~ = W applied under
/// `conv`, q^i = Pi^d_{m_i} q~^i. Sequences longer than d are accepted.
inline HyperVec proj_pad_pipeline(const HyperVec& x, const Mat& w, std::size_t d, const Dims& dims_out,
                                  WeightConvention conv = WeightConvention::feature) {
    if (d == 0) throw InvalidArgument("proj_pad_pipeline: nominal dimension must be positive");
    const DiamondPlan<double> pad_plan(x.dims(), d);
    const Mat padded = pad_plan.pad(x);
    const Mat q = apply_weight(w, padded, conv);
    if (dims_out.size() != q.rows()) {
        throw ShapeError("proj_pad_pipeline: " + std::to_string(dims_out.size()) + " output dims for " +
                         std::to_string(q.rows()) + " output rows");
    }
    std::vector<Vec> comps;
    for (std::size_t i = 0; i < q.rows(); ++i) comps.push_back(project(q.row(i), dims_out[i]));
    return HyperVec(std::move(comps));
}

/// Score matrix before masking and softmax.
///   sqrt_dim:   Q .w K            (sqrt(lcm) weighting; Q K^T / sqrt(d) when uniform)
///   dim:        Q . K             (Q K^T / d when uniform)
///   sqrt_batch: raw expanded dot products / sqrt(s)
inline Mat attention_scores(const HyperVec& q, const HyperVec& k, ScaleMode mode) {
    switch (mode) {
        case ScaleMode::sqrt_dim: return hyper_inner_weighted(q, k);
        case ScaleMode::dim: return hyper_inner(q, k);
        case ScaleMode::sqrt_batch: {
            Mat out = hyper_inner(q, k);
            const double root_s = std::sqrt(static_cast<double>(q.size()));
            for (std::size_t i = 0; i < out.rows(); ++i)
                for (std::size_t j = 0; j < out.cols(); ++j)
                    out(i, j) *= static_cast<double>(lcm(q[i].dim(), k[j].dim())) / root_s;
            return out;
        }
    }
    throw InvalidArgument("attention_scores: unknown scale mode");
}

struct DvAttention {
    Mat weights;      // p x q attention matrix, stochastic rows
    HyperVec values;  // attention output
};

namespace detail {

inline DvAttention dv_attention_impl(const HyperVec& q, const HyperVec& k, const HyperVec& v,
                                     const AttentionOptions& opts, std::optional<Dims> out_dims) {
    const std::size_t p = q.size();
    const std::size_t nk = k.size();
    const std::size_t nv = v.size();
    Mat a = masked_softmax(attention_scores(q, k, opts.scale), opts.mask);
    Dims dims = out_dims ? *out_dims : (p == nv ? v.dims() : q.dims());
    if (dims.size() != p) {
        throw ShapeError("dv_attention: " + std::to_string(dims.size()) + " output dims for " + std::to_string(p) +
                         " queries");
    }
    const std::size_t n0 = v.max_dim();
    if (nk == nv) {
        const DiamondPlan<double> plan(v.dims(), n0, dims);
        HyperVec out = plan.apply(a, v);
        return {std::move(a), std::move(out)};
    }
    // (A (x) 1^T_{t/q}) <> (1_{t/r} (x) V)
    const std::size_t t = lcm(nk, nv);
    Mat wide = kron(a, ones<double>(1, t / nk));
    std::vector<Vec> tiled;
    tiled.reserve(t);
    for (std::size_t l = 0; l < t; ++l) tiled.push_back(v[l % nv]);
    const HyperVec vt(std::move(tiled));
    const DiamondPlan<double> plan(vt.dims(), n0, dims);
    HyperVec out = plan.apply(wide, vt);
    return {std::move(a), std::move(out)};
}

}  // namespace detail

/// A = softmax(scores(Q, K) + mask), output A <> V with n_0 = max b_i.
/// Batch sizes that differ are routed to dv_attention_general.
inline DvAttention dv_attention(const HyperVec& q, const HyperVec& k, const HyperVec& v, AttentionOptions opts = {}) {
    return detail::dv_attention_impl(q, k, v, opts, std::nullopt);
}

/// Attention for batch sizes p (Q), q (K), r (V). With t = lcm(q, r), the
/// p x q attention matrix is widened to A (x) 1^T_{t/q} and V is tiled to
/// 1_{t/r} (x) V before the diamond step. Output dims default to V's dims
/// when p == r, else Q's dims.
inline DvAttention dv_attention_general(const HyperVec& q, const HyperVec& k, const HyperVec& v,
                                        AttentionOptions opts = {}, std::optional<Dims> out_dims = {}) {
    return detail::dv_attention_impl(q, k, v, opts, std::move(out_dims));
}

/// Multi-head concat and output maps.
///
/// v_c^k = sum_i w_i Pi^{b^i_k}_{b^0_k} v_i^k (weights default to 1), then
/// v_d^k = pi_k v_c^k when output maps are given.
inline HyperVec dv_multi_head(const std::vector<HyperVec>& heads, const Dims& target,
                              const std::vector<double>& weights = {}, const std::vector<Mat>& out_maps = {}) {
    if (heads.empty()) throw InvalidArgument("dv_multi_head: need at least one head");
    const std::size_t s = heads[0].size();
    for (std::size_t h = 0; h < heads.size(); ++h) detail::require_batch(heads[h], s, "head", "dv_multi_head");
    if (target.size() != s) {
        throw ShapeError("dv_multi_head: " + std::to_string(target.size()) + " target dims for batch size " +
                         std::to_string(s));
    }
    if (!weights.empty() && weights.size() != heads.size()) {
        throw ShapeError("dv_multi_head: " + std::to_string(weights.size()) + " weights for " +
                         std::to_string(heads.size()) + " heads");
    }
    for (double w : weights)
        if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("dv_multi_head: head weights must be >= 0");
    if (!out_maps.empty() && out_maps.size() != s) {
        throw ShapeError("dv_multi_head: " + std::to_string(out_maps.size()) + " output maps for batch size " +
                         std::to_string(s));
    }
    std::vector<Vec> comps;
    for (std::size_t k = 0; k < s; ++k) {
        Vec acc(target[k]);
        for (std::size_t h = 0; h < heads.size(); ++h) {
            const double w = weights.empty() ? 1.0 : weights[h];
            acc += project(heads[h][k], target[k]) * w;
        }
        if (!out_maps.empty()) {
            if (out_maps[k].cols() != target[k]) {
                throw ShapeError("dv_multi_head: output map " + std::to_string(k + 1) + " is " + out_maps[k].shape() +
                                 " but the concat component has dimension " + std::to_string(target[k]));
            }
            acc = out_maps[k] * acc;
        }
        comps.push_back(std::move(acc));
    }
    return HyperVec(std::move(comps));
}

/// Vector-wise normalizes each component; layer-wise pools every entry.
inline HyperVec normalize(const HyperVec& x, const NormParams& p) {
    if (!(p.epsilon > 0.0)) throw InvalidArgument("normalize: epsilon must be positive");
    if (p.mode == NormMode::vector_wise) {
        std::vector<Vec> comps;
        for (const auto& c : x) {
            Vec y = c;
            detail::normalize_group(y.data(), p);
            comps.push_back(std::move(y));
        }
        return HyperVec(std::move(comps));
    }
    Vec flat = to_addition_form(x);
    detail::normalize_group(flat.data(), p);
    return from_addition_form(flat, x.dims());
}

/// z^i = Pi^{n_i}_{m_i} x^i + f^i, then ReLU and normalization; output dims are F's.
inline HyperVec df_add_norm(const HyperVec& x, const HyperVec& f, const NormParams& p = {}) {
    detail::require_batch(f, x.size(), "F(X)", "df_add_norm");
    std::vector<Vec> comps;
    for (std::size_t i = 0; i < x.size(); ++i) comps.push_back(relu(project(x[i], f[i].dim()) + f[i]));
    return normalize(HyperVec(std::move(comps)), p);
}

/// Dimension-free feed-forward weights: W1, W2 in M(s x s); optional ragged biases.
struct DfFfnWeights {
    Mat w1;
    Mat w2;
    std::optional<HyperVec> b1;
    std::optional<HyperVec> b2;
};

/// FFN(X) = W2 <> ReLU(W1 <> X +_n B1) +_n B2 with n the input dims.
inline HyperVec df_ffn(const HyperVec& x, const DfFfnWeights& w, std::optional<std::size_t> nominal_dim = {}) {
    const std::size_t s = x.size();
    if (w.w1.rows() != s || w.w1.cols() != s || w.w2.rows() != s || w.w2.cols() != s) {
        throw ShapeError("df_ffn: W1 " + w.w1.shape() + " and W2 " + w.w2.shape() + " must be " + std::to_string(s) +
                         "x" + std::to_string(s));
    }
    const Dims n = x.dims();
    const DiamondPlan<double> plan(n, nominal_dim.value_or(x.max_dim()));
    HyperVec h = plan.apply(w.w1, x);
    if (w.b1) {
        detail::require_batch(*w.b1, s, "B1", "df_ffn");
        h = hyper_add_listwise(h, *w.b1, n);
    }
    h = plan.apply(w.w2, relu(std::move(h)));
    if (w.b2) {
        detail::require_batch(*w.b2, s, "B2", "df_ffn");
        h = hyper_add_listwise(h, *w.b2, n);
    }
    return h;
}

/// Query/key/value maps for one head, feature convention (d x d) unless the
/// config selects the batch convention.
struct HeadWeights {
    Mat wq, wk, wv;
};

struct BlockWeights {
    std::vector<HeadWeights> heads;
    std::vector<double> head_weights;  // empty: all 1
    std::vector<Mat> out_maps;         // empty: identity
    DfFfnWeights ffn;
    double gamma = 1.0;
    double beta = 0.0;
};

struct ModelConfig {
    std::size_t batch_size = 1;
    std::size_t nominal_dim = 1;
    std::size_t heads = 1;
    Dims q_dims;  // empty: the block's input dims
    Dims k_dims;
    Dims v_dims;
    PaddingMode padding = PaddingMode::projection;
    ScaleMode scale = ScaleMode::sqrt_dim;
    MaskMode mask = MaskMode::none;
    WeightConvention qkv_convention = WeightConvention::feature;
    NormMode norm = NormMode::vector_wise;
    double epsilon = 1e-3;
    std::size_t layers = 1;

    void validate() const {
        if (batch_size == 0 || nominal_dim == 0 || heads == 0) {
            throw InvalidArgument("config: batch_size, nominal_dim and heads must be positive");
        }
        for (const Dims* d : {&q_dims, &k_dims, &v_dims}) {
            if (!d->empty() && d->size() != batch_size) {
                throw ShapeError("config: dimension list " + dims_str(*d) + " must have " + std::to_string(batch_size) +
                                 " entries");
            }
            for (auto v : *d)
                if (v == 0) throw InvalidArgument("config: dimensions must be positive");
        }
        if (!(epsilon > 0.0)) throw InvalidArgument("config: epsilon must be positive");
        if (padding == PaddingMode::zero && qkv_convention != WeightConvention::feature) {
            throw InvalidArgument("config: zero padding requires the feature weight convention");
        }
    }
};

/// Checks every weight shape against the config and an input profile.
inline void validate_weights(const BlockWeights& w, const ModelConfig& cfg, const Dims& input_dims) {
    cfg.validate();
    const std::size_t s = cfg.batch_size;
    if (input_dims.size() != s) {
        throw ShapeError("input batch size " + std::to_string(input_dims.size()) + " does not match config batch size " +
                         std::to_string(s));
    }
    if (w.heads.size() != cfg.heads) {
        throw ShapeError("weights have " + std::to_string(w.heads.size()) + " heads, config has " +
                         std::to_string(cfg.heads));
    }
    const std::size_t d = cfg.nominal_dim;
    const std::size_t wn = cfg.qkv_convention == WeightConvention::feature ? d : s;
    for (std::size_t h = 0; h < w.heads.size(); ++h) {
        for (const Mat* m : {&w.heads[h].wq, &w.heads[h].wk, &w.heads[h].wv}) {
            if (m->rows() != wn || m->cols() != wn) {
                throw ShapeError("head " + std::to_string(h + 1) + " weight " + m->shape() + " must be " +
                                 std::to_string(wn) + "x" + std::to_string(wn));
            }
        }
    }
    if (cfg.padding == PaddingMode::zero) {
        std::size_t widest = 0;
        for (const Dims* l : {&input_dims, &cfg.q_dims, &cfg.k_dims, &cfg.v_dims})
            for (auto v : *l) widest = std::max(widest, v);
        if (widest > d) {
            throw ShapeError("zero padding to nominal dim " + std::to_string(d) + " cannot hold a sequence of dimension " +
                             std::to_string(widest));
        }
    }
    if (w.ffn.w1.rows() != s || w.ffn.w1.cols() != s || w.ffn.w2.rows() != s || w.ffn.w2.cols() != s) {
        throw ShapeError("FFN weights W1 " + w.ffn.w1.shape() + " and W2 " + w.ffn.w2.shape() + " must be " +
                         std::to_string(s) + "x" + std::to_string(s));
    }
    for (const auto* b : {&w.ffn.b1, &w.ffn.b2})
        if (*b && (*b)->size() != s) {
            throw ShapeError("FFN bias has batch size " + std::to_string((*b)->size()) + ", expected " +
                             std::to_string(s));
        }
    if (!w.head_weights.empty() && w.head_weights.size() != cfg.heads) {
        throw ShapeError(std::to_string(w.head_weights.size()) + " head weights for " + std::to_string(cfg.heads) +
                         " heads");
    }
    if (!w.out_maps.empty()) {
        if (w.out_maps.size() != s) {
            throw ShapeError(std::to_string(w.out_maps.size()) + " output maps for batch size " + std::to_string(s));
        }
        const Dims& b = cfg.v_dims.empty() ? input_dims : cfg.v_dims;
        for (std::size_t k = 0; k < s; ++k)
            if (w.out_maps[k].cols() != b[k]) {
                throw ShapeError("output map " + std::to_string(k + 1) + " is " + w.out_maps[k].shape() +
                                 " but value dimension is " + std::to_string(b[k]));
            }
    }
}

/// Attention matrices recorded during a forward pass, [layer][head].
struct ForwardTrace {
    std::vector<std::vector<Mat>> attention;
};

inline HyperVec qkv_map(const HyperVec& x, const Mat& w, const Dims& dims_out, const ModelConfig& cfg) {
    if (cfg.padding == PaddingMode::zero) return zero_pad_pipeline(x, w, dims_out);
    return proj_pad_pipeline(x, w, cfg.nominal_dim, dims_out, cfg.qkv_convention);
}

/// One encoder block: attention -> add & norm -> feed-forward -> add & norm.
inline HyperVec encoder_block(const HyperVec& x, const BlockWeights& w, const ModelConfig& cfg,
                              std::vector<Mat>* attention_out = nullptr) {
    const Dims n = x.dims();
    validate_weights(w, cfg, n);
    const Dims m = cfg.q_dims.empty() ? n : cfg.q_dims;
    const Dims a = cfg.k_dims.empty() ? n : cfg.k_dims;
    const Dims b = cfg.v_dims.empty() ? n : cfg.v_dims;
    const AttentionOptions opts{cfg.scale, cfg.mask};

    std::vector<HyperVec> head_out;
    for (std::size_t h = 0; h < w.heads.size(); ++h) {
        try {
            const HyperVec q = qkv_map(x, w.heads[h].wq, m, cfg);
            const HyperVec k = qkv_map(x, w.heads[h].wk, a, cfg);
            const HyperVec v = qkv_map(x, w.heads[h].wv, b, cfg);
            DvAttention att = dv_attention(q, k, v, opts);
            if (attention_out) attention_out->push_back(std::move(att.weights));
            head_out.push_back(std::move(att.values));
        } catch (const Error& e) {
            rethrow_with_context(e, "head " + std::to_string(h + 1));
        }
    }
    HyperVec f = (head_out.size() == 1 && w.out_maps.empty() && w.head_weights.empty())
                     ? head_out[0]
                     : dv_multi_head(head_out, b, w.head_weights, w.out_maps);

    const NormParams norm{cfg.norm, w.gamma, w.beta, cfg.epsilon};
    const HyperVec z = df_add_norm(x, f, norm);
    return df_add_norm(z, df_ffn(z, w.ffn), norm);
}

/// cfg.layers encoder blocks. A single weight set is shared by every layer;
/// otherwise one set per layer is required. Zero layers is the identity.
inline HyperVec encoder_stack(const HyperVec& x, const std::vector<BlockWeights>& weights, const ModelConfig& cfg,
                              ForwardTrace* trace = nullptr) {
    if (cfg.layers == 0) return x;
    if (weights.size() != 1 && weights.size() != cfg.layers) {
        throw ShapeError(std::to_string(weights.size()) + " weight sets for " + std::to_string(cfg.layers) + " layers");
    }
    HyperVec h = x;
    for (std::size_t l = 0; l < cfg.layers; ++l) {
        std::vector<Mat> att;
        try {
            h = encoder_block(h, weights.size() == 1 ? weights[0] : weights[l], cfg, trace ? &att : nullptr);
        } catch (const Error& e) {
            rethrow_with_context(e, "encoder block " + std::to_string(l + 1));
        }
        if (trace) trace->attention.push_back(std::move(att));
    }
    return h;
}

}  // namespace stpdft
