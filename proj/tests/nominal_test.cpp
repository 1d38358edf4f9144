#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"

using namespace stpdft;

TEST(PositionalEncoding, Examples) {
    const Mat p = positional_encoding(3, 4);
    EXPECT_EQ(p.row(0), (Vec{0, 1, 0, 1}));
    EXPECT_NEAR(p(1, 0), 0.841471, 1e-6);
    EXPECT_NEAR(p(1, 1), 0.540302, 1e-6);
    EXPECT_DOUBLE_EQ(p(2, 2), std::sin(2.0 / 100.0));
    EXPECT_DOUBLE_EQ(p(2, 3), std::cos(2.0 / 100.0));
    EXPECT_THROW(positional_encoding(3, 5), InvalidArgument);
    const Mat x(3, 4, 0.5);
    EXPECT_EQ(pe_apply(x), x + p);
}

TEST(QkvNominal, Examples) {
    SplitMix64 rng(61);
    const Mat x = oracle::random_matrix(rng, 3, 2);
    const Mat i2 = Mat::identity(2);
    EXPECT_EQ(qkv_nominal(x, i2, i2, i2).q, x);

    const Mat x2{{1, 2}, {3, 4}};
    const Mat swap{{0, 1}, {1, 0}}, w{{1, 2}, {0, -1}};
    const Qkv r = qkv_nominal(x2, swap, w, i2);
    EXPECT_EQ(r.q, (Mat{{2, 1}, {4, 3}}));
    EXPECT_EQ(r.k, (Mat{{5, -2}, {11, -4}}));
    EXPECT_EQ(r.v, x2);

    // Q^T = W X^T, so V_r(Q^T) = (W (x) I_s) V_r(X^T).
    const Mat wq = oracle::random_matrix(rng, 2, 2);
    EXPECT_LE(oracle::max_abs_diff(qkv_vectorized(wq, x.transpose()), qkv_nominal(x, wq, i2, i2).q.transpose().row_stack()),
              1e-15);
    EXPECT_THROW(qkv_nominal(x, Mat::identity(3), i2, i2), ShapeError);
}

TEST(QkvNominal, BatchConvention) {
    SplitMix64 rng(62);
    const Mat x = oracle::random_matrix(rng, 3, 2), w = oracle::random_matrix(rng, 3, 3);
    EXPECT_EQ(qkv_nominal(x, w, w, w, WeightConvention::batch).q, w * x);
}

TEST(AttentionNominal, ZeroScoresAverageValues) {
    SplitMix64 rng(63);
    const Mat v = oracle::random_matrix(rng, 4, 3);
    const Attention a = attention_nominal(Mat(4, 2), Mat(4, 2), v);
    EXPECT_EQ(a.weights, Mat(4, 4, 0.25));
    for (std::size_t j = 0; j < 3; ++j) {
        const double mean = (v(0, j) + v(1, j) + v(2, j) + v(3, j)) / 4.0;
        for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(a.values(i, j), mean, 1e-15);
    }
}

TEST(AttentionNominal, SingleToken) {
    SplitMix64 rng(64);
    const Mat q = oracle::random_matrix(rng, 1, 3), v = oracle::random_matrix(rng, 1, 3);
    const Attention a = attention_nominal(q, q, v);
    EXPECT_EQ(a.weights, (Mat{{1}}));
    EXPECT_EQ(a.values, v);
}

TEST(AttentionNominal, MatchesDirectFormula) {
    SplitMix64 rng(65);
    const Mat q = oracle::random_matrix(rng, 3, 4), k = oracle::random_matrix(rng, 3, 4), v = oracle::random_matrix(rng, 3, 4);
    const oracle::EMat eq = oracle::to_eigen(q), ek = oracle::to_eigen(k), ev = oracle::to_eigen(v);
    const std::pair<ScaleMode, double> modes[] = {
        {ScaleMode::sqrt_dim, 2.0}, {ScaleMode::sqrt_batch, std::sqrt(3.0)}, {ScaleMode::dim, 4.0}};
    for (const auto& [mode, scale] : modes) {
        const oracle::EMat expected = oracle::softmax_rows(eq * ek.transpose() / scale) * ev;
        EXPECT_LE(oracle::max_abs_diff(attention_nominal(q, k, v, {mode, MaskMode::none}).values, expected), 1e-14);
    }
}

TEST(AttentionNominal, CausalMaskKeepsPast) {
    SplitMix64 rng(66);
    const Mat q = oracle::random_matrix(rng, 3, 2), v = oracle::random_matrix(rng, 3, 2);
    const Attention a = attention_nominal(q, q, v, {ScaleMode::sqrt_dim, MaskMode::causal});
    EXPECT_EQ(a.weights(0, 0), 1.0);
    EXPECT_EQ(a.values.row(0), v.row(0));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i + 1; j < 3; ++j) EXPECT_EQ(a.weights(i, j), 0.0);
    EXPECT_THROW(attention_nominal(q, q, v, {ScaleMode::sqrt_dim, MaskMode::literal}), DegenerateRow);
}

TEST(CausalMask, Examples) {
    EXPECT_EQ(causal_mask(2), (Mat{{0, masked}, {0, 0}}));
    EXPECT_EQ(causal_mask(2, MaskMode::literal), (Mat{{masked, 0}, {masked, masked}}));
    EXPECT_EQ(causal_mask(1), (Mat{{0}}));
    EXPECT_EQ(causal_mask(3, MaskMode::none), Mat(3, 3));
}

TEST(MultiHeadNominal, SingleHeadIdentityMapIsAttention) {
    SplitMix64 rng(67);
    const Mat x = oracle::random_matrix(rng, 3, 2);
    const Mat i2 = Mat::identity(2);
    const Mat out = multi_head_nominal(x, x, x, {{i2, i2, i2}}, Mat::identity(6));
    EXPECT_LE(oracle::max_abs_diff(out, attention_nominal(x, x, x).values), 1e-15);
}

TEST(MultiHeadNominal, ConcatIsKroneckerOfHeadRows) {
    SplitMix64 rng(68);
    const std::size_t s = 3;
    const Mat v = oracle::random_matrix(rng, s, 3), k = oracle::random_matrix(rng, s, 3), q = oracle::random_matrix(rng, s, 3);
    std::vector<HeadMaps> heads;
    for (int h = 0; h < 2; ++h)
        heads.push_back({oracle::random_matrix(rng, 2, 3), oracle::random_matrix(rng, 2, 3), oracle::random_matrix(rng, 2, 3)});
    const Mat mw = oracle::random_matrix(rng, 2 * s, 4 * s);
    const Mat out = multi_head_nominal(v, k, q, heads, mw);
    ASSERT_EQ(out.rows(), s);
    ASSERT_EQ(out.cols(), 2u);

    std::vector<oracle::EMat> per_head;
    for (const auto& h : heads) {
        const oracle::EMat qh = oracle::to_eigen(q) * oracle::to_eigen(h.tq).transpose();
        const oracle::EMat kh = oracle::to_eigen(k) * oracle::to_eigen(h.tk).transpose();
        const oracle::EMat vh = oracle::to_eigen(v) * oracle::to_eigen(h.tv).transpose();
        per_head.push_back(oracle::softmax_rows(qh * kh.transpose() / std::sqrt(2.0)) * vh);
    }
    oracle::EVec concat(4 * s);
    for (std::size_t j = 0; j < s; ++j)
        concat.segment(4 * j, 4) = oracle::kron(per_head[0].row(j).transpose(), per_head[1].row(j).transpose());
    const oracle::EVec flat = oracle::to_eigen(mw) * concat;
    EXPECT_LE(oracle::max_abs_diff(out.row_stack(), flat), 1e-14);

    EXPECT_THROW(multi_head_nominal(v, k, q, heads, Mat(2 * s, 4 * s + 1)), ShapeError);
    EXPECT_THROW(multi_head_nominal(v, k, q, heads, mw, {}, 8), SizeBudgetError);
}

TEST(AddNorm, ConstantRowsBecomeBeta) {
    const Mat x(2, 3, 0.7);
    const Mat y = add_norm(x, Mat(2, 3, 0.1), {NormMode::vector_wise, 2.0, 0.25, 1e-3});
    EXPECT_EQ(y, Mat(2, 3, 0.25));
}

TEST(AddNorm, RowsHaveZeroMean) {
    SplitMix64 rng(69);
    const Mat x = oracle::random_matrix(rng, 4, 5, 0.0, 2.0), f = oracle::random_matrix(rng, 4, 5, 0.0, 2.0);
    const Mat y = add_norm(x, f, {NormMode::vector_wise, 1.0, 0.0, 1e-12});
    for (std::size_t i = 0; i < 4; ++i) {
        double mean = 0.0;
        for (std::size_t j = 0; j < 5; ++j) mean += y(i, j);
        EXPECT_NEAR(mean / 5.0, 0.0, 1e-12);
    }
}

TEST(AddNorm, ReluAndLiteralVariance) {
    // x + f = [-3, 1, 3]: ReLU gives [0, 1, 3], E = 4/3, sum of squares 14/3,
    // Var = sqrt(14/3) / 3.
    const Mat y = add_norm(Mat{{-1, 0, 1}}, Mat{{-2, 1, 2}}, {NormMode::vector_wise, 1.0, 0.0, 1e-3});
    const double e = 4.0 / 3.0, var = std::sqrt(14.0 / 3.0) / 3.0, den = std::sqrt(var + 1e-3);
    EXPECT_NEAR(y(0, 0), (0 - e) / den, 1e-15);
    EXPECT_NEAR(y(0, 1), (1 - e) / den, 1e-15);
    EXPECT_NEAR(y(0, 2), (3 - e) / den, 1e-15);
}

TEST(AddNorm, LayerWisePoolsEveryEntry) {
    SplitMix64 rng(70);
    const Mat x = oracle::random_matrix(rng, 3, 2, 0.5, 1.0);
    const Mat y = add_norm(x, Mat(3, 2), {NormMode::layer_wise, 1.0, 0.0, 1e-3});
    double sum = 0.0;
    for (double v : y.data()) sum += v;
    EXPECT_NEAR(sum, 0.0, 1e-12);
    EXPECT_THROW(add_norm(x, Mat(2, 3)), ShapeError);
}

TEST(FfnNominal, IdentityWeightsGiveRelu) {
    SplitMix64 rng(71);
    const Mat x = oracle::random_matrix(rng, 3, 4);
    EXPECT_EQ(ffn_nominal(x, {Mat::identity(3), std::nullopt, Mat::identity(3), std::nullopt}), relu(x));
}

TEST(FfnNominal, MatchesDirectFormulaWithBiases) {
    SplitMix64 rng(72);
    const Mat x = oracle::random_matrix(rng, 3, 4);
    const Mat w1 = oracle::random_matrix(rng, 5, 3), w2 = oracle::random_matrix(rng, 2, 5);
    const HyperVec b1 = oracle::random_hyper(rng, {4, 4, 4, 4, 4});
    const HyperVec b2 = oracle::random_hyper(rng, {2, 4});
    const Mat got = ffn_nominal(x, {w1, b1, w2, b2});
    oracle::EMat h = oracle::to_eigen(w1) * oracle::to_eigen(x);
    for (Eigen::Index i = 0; i < h.rows(); ++i) h.row(i) += oracle::to_eigen(b1[i]).transpose();
    h = oracle::to_eigen(w2) * h.cwiseMax(0.0);
    h.row(0) += oracle::proj_kron(2, 4).operator*(oracle::to_eigen(b2[0])).transpose();
    h.row(1) += oracle::to_eigen(b2[1]).transpose();
    EXPECT_LE(oracle::max_abs_diff(got, h), 1e-14);
    EXPECT_THROW(ffn_nominal(x, {w2, std::nullopt, w1, std::nullopt}), ShapeError);
}

TEST(AssembledAttention, ZeroInputGivesUniformRows) {
    SplitMix64 rng(73);
    const Mat w = oracle::random_matrix(rng, 3, 3);
    EXPECT_EQ(assembled_attention(Mat(4, 3), w, w, w), Mat(4, 3, 1.0 / 3.0));
}

TEST(AssembledAttention, MatchesPrintedComposition) {
    SplitMix64 rng(74);
    const Mat x = oracle::random_matrix(rng, 4, 3);
    const Mat wq = oracle::random_matrix(rng, 3, 3), wk = oracle::random_matrix(rng, 3, 3), wv = oracle::random_matrix(rng, 3, 3);
    const oracle::EMat ex = oracle::to_eigen(x);
    const oracle::EMat expected = oracle::softmax_rows(ex * oracle::to_eigen(wq).transpose() * oracle::to_eigen(wk) *
                                                       ex.transpose() * ex * oracle::to_eigen(wv).transpose());
    EXPECT_LE(oracle::max_abs_diff(assembled_attention(x, wq, wk, wv), expected), 1e-13);
}

TEST(AssembledAttention, DependsOnlyOnQueryKeyProduct) {
    SplitMix64 rng(75);
    const Mat x = oracle::random_matrix(rng, 4, 3);
    const Mat wq = oracle::random_matrix(rng, 3, 3), wk = oracle::random_matrix(rng, 3, 3), wv = oracle::random_matrix(rng, 3, 3);
    // Householder H is symmetric orthogonal, so (H Wq)^T (H Wk) = Wq^T Wk.
    const Vec u = oracle::random_vector(rng, 3);
    const Mat h = Mat::identity(3) - Mat::column(u) * Mat::row_vector(u) * (2.0 / (Mat::row_vector(u) * Mat::column(u))(0, 0));
    const Mat base = assembled_attention(x, wq, wk, wv);
    EXPECT_LE(oracle::max_abs_diff(assembled_attention(x, h * wq, h * wk, wv), base), 1e-9);
    for (double lambda : {1e-3, 3.0, 1e3})
        EXPECT_LE(oracle::max_abs_diff(assembled_attention(x, wq * lambda, wk, wv * (1.0 / lambda)), base), 1e-9)
            << "lambda " << lambda;
}
