#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"

using namespace stpdft;

TEST(Softmax, Examples) {
    EXPECT_EQ(softmax(Vec{0, 0, 0, 0}), (Vec{0.25, 0.25, 0.25, 0.25}));
    const Vec p = softmax(Vec{std::log(1.0), std::log(3.0)});
    EXPECT_NEAR(p[0], 0.25, 1e-15);
    EXPECT_NEAR(p[1], 0.75, 1e-15);
    EXPECT_EQ(softmax(Vec{-7.5, masked}), (Vec{1, 0}));
}

TEST(Softmax, RejectsDegenerateAndNonFinite) {
    EXPECT_THROW(softmax(Vec{masked, masked}), DegenerateRow);
    EXPECT_THROW(softmax(Vec{1, std::nan("")}), NonFiniteError);
    EXPECT_THROW(softmax(Vec{1, INFINITY}), NonFiniteError);
}

TEST(Softmax, StableForLargeInputs) {
    const Vec p = softmax(Vec{1000, 1000 + std::log(3.0)});
    EXPECT_NEAR(p[0], 0.25, 1e-12);
    EXPECT_NEAR(p[1], 0.75, 1e-12);
    const Vec q = softmax(Vec{-1e4, 0});
    EXPECT_EQ(q[1], 1.0);
}

TEST(Softmax, ShiftInvariant) {
    SplitMix64 rng(51);
    for (int trial = 0; trial < 50; ++trial) {
        const Vec x = oracle::random_vector(rng, oracle::random_dim(rng, 1, 8), -5, 5);
        const double c = rng.uniform(-50, 50);
        EXPECT_LE(oracle::max_abs_diff(softmax(x + Vec(x.dim(), c)), softmax(x)), 1e-12);
    }
}

TEST(SoftmaxRows, Examples) {
    EXPECT_EQ(softmax_rows(Mat(3, 3)), Mat(3, 3, 1.0 / 3.0));
    const Vec r{0.5, -1, 2};
    EXPECT_EQ(softmax_rows(Mat::row_vector(r)).row(0), softmax(r));
    SplitMix64 rng(52);
    const Mat e = oracle::random_matrix(rng, 3, 4, -3, 3);
    const Mat a = softmax_rows(e);
    for (std::size_t i = 0; i < 3; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < 4; ++j) sum += a(i, j);
        EXPECT_NEAR(sum, 1.0, 1e-12);
    }
    EXPECT_LE(oracle::max_abs_diff(a, oracle::softmax_rows(oracle::to_eigen(e))), 1e-15);
}

TEST(SoftmaxRows, DegenerateRowNamesTheRow) {
    Mat e(3, 2);
    e(1, 0) = masked;
    e(1, 1) = masked;
    try {
        softmax_rows(e);
        FAIL() << "expected DegenerateRow";
    } catch (const DegenerateRow& err) {
        EXPECT_NE(std::string(err.what()).find("row 2"), std::string::npos) << err.what();
    }
}

TEST(Stochastic, Predicates) {
    EXPECT_TRUE(is_stochastic_vector(softmax(Vec{0.3, 2, -1})));
    EXPECT_TRUE(is_stochastic_matrix(Mat::identity(4)));
    EXPECT_FALSE(is_stochastic_matrix(Mat{{.5, .5}, {.6, .5}}));
    EXPECT_FALSE(is_stochastic_vector(Vec{1.5, -0.5}));
}

TEST(Stochastic, ProductOfStochasticIsStochastic) {
    SplitMix64 rng(53);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t m = oracle::random_dim(rng, 1, 6), n = oracle::random_dim(rng, 1, 6);
        const Mat a = oracle::random_stochastic(rng, m, n);
        const Vec x = oracle::random_stochastic(rng, n, 1).col(0);
        EXPECT_TRUE(is_stochastic_vector(a * x, 1e-12));
    }
}

TEST(Stochastic, WeightedDkStpClosure) {
    SplitMix64 rng(54);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t m = oracle::random_dim(rng, 1, 6), n = oracle::random_dim(rng, 1, 6);
        const std::size_t p = oracle::random_dim(rng, 1, 6), q = oracle::random_dim(rng, 1, 6);
        const Mat a = oracle::random_stochastic(rng, m, n), b = oracle::random_stochastic(rng, p, q);
        EXPECT_TRUE(is_stochastic_matrix(weighted_dk_stp(a, b), 1e-12));
        const Vec x = oracle::random_stochastic(rng, p, 1).col(0);
        EXPECT_TRUE(is_stochastic_vector(weighted_dk_stp(a, x), 1e-12));
    }
}

TEST(Stochastic, SoftmaxRowsTransposedIsStochastic) {
    SplitMix64 rng(55);
    const Mat x = oracle::random_matrix(rng, 5, 3, -4, 4);
    EXPECT_TRUE(is_stochastic_matrix(softmax_rows(x).transpose(), 1e-12));
}
