// Copyright 2026 The ctnet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>

#include "ctnet/error.hpp"
#include "ctnet/transitions.hpp"
#include "support/oracles.hpp"

namespace ctnet {
namespace {

Vector vec(std::initializer_list<double> v)
{
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) {
        out(i++) = x;
    }
    return out;
}

TEST(Cosine, KnownValues)
{
    EXPECT_DOUBLE_EQ(cosine_similarity(vec({1, 0}), vec({0, 1})), 0.0);
    EXPECT_NEAR(cosine_similarity(vec({1, 1}), vec({2, 2})), 1.0, 1e-15);
    EXPECT_NEAR(cosine_similarity(vec({1, 2}), vec({2, 1})), 0.8, 1e-15);
}

TEST(Cosine, DegenerateNormReturnsZero)
{
    EXPECT_EQ(cosine_similarity(vec({0, 0, 0}), vec({1, 2, 3})), 0.0);
    EXPECT_EQ(cosine_similarity(vec({1e-9, 0}), vec({1, 0})), 0.0);
}

TEST(Cosine, LengthMismatchThrows)
{
    EXPECT_THROW(cosine_similarity(vec({1, 2}), vec({1, 2, 3})), ArgumentError);
}

TEST(Cosine, ScaledCopyIsPlusOrMinusOne)
{
    Rng rng(7);
    for (int t = 0; t < 100; ++t) {
        const Vector a = oracle::random_vector(rng, 1 + static_cast<Eigen::Index>(rng.below(40)));
        const double alpha = rng.uniform(0.1, 10.0);
        EXPECT_NEAR(cosine_similarity(a, alpha * a), 1.0, 1e-12);
        EXPECT_NEAR(cosine_similarity(a, -alpha * a), -1.0, 1e-12);
    }
}

TEST(Pearson, KnownValues)
{
    EXPECT_NEAR(pearson(vec({1, 2, 3}), vec({2, 4, 6})), 1.0, 1e-15);
    EXPECT_NEAR(pearson(vec({1, 2, 3}), vec({3, 2, 1})), -1.0, 1e-15);
    EXPECT_NEAR(pearson(vec({1, 2, 3, 4}), vec({1, 3, 2, 4})), 0.8, 1e-15);
}

TEST(Pearson, ConstantVectorReturnsZero)
{
    const double r = pearson(vec({3, 3, 3, 3}), vec({1, 2, 3, 4}));
    EXPECT_EQ(r, 0.0);
    EXPECT_FALSE(std::isnan(r));
}

TEST(Pearson, ArgumentErrors)
{
    EXPECT_THROW(pearson(vec({1}), vec({1})), ArgumentError);
    EXPECT_THROW(pearson(vec({1, 2}), vec({1, 2, 3})), ArgumentError);
}

TEST(Pearson, SymmetryAndAffineInvariance)
{
    Rng rng(11);
    for (int t = 0; t < 200; ++t) {
        const auto d = 2 + static_cast<Eigen::Index>(rng.below(63));
        const Vector a = oracle::random_vector(rng, d);
        const Vector b = oracle::random_vector(rng, d);
        const double r = pearson(a, b);
        EXPECT_GE(r, -1.0);
        EXPECT_LE(r, 1.0);
        EXPECT_EQ(r, pearson(b, a));
        const double alpha = rng.uniform(0.5, 4.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
        const double beta = rng.uniform(-3.0, 3.0);
        const Vector shifted = (alpha * b).array() + beta;
        EXPECT_NEAR(pearson(a, shifted), (alpha > 0 ? 1.0 : -1.0) * r, 1e-12);
    }
}

TEST(Similarity, MatchesDefinitionalOracles)
{
    Rng rng(2024);
    for (int t = 0; t < 1000; ++t) {
        const auto d = 2 + static_cast<Eigen::Index>(rng.below(63));
        const Vector a = oracle::random_vector(rng, d);
        const Vector b = oracle::random_vector(rng, d);
        EXPECT_NEAR(cosine_similarity(a, b), oracle::cosine(oracle::to_vec(a), oracle::to_vec(b)), 1e-10);
        EXPECT_NEAR(pearson(a, b), oracle::pearson(oracle::to_vec(a), oracle::to_vec(b)), 1e-10);
    }
}

TEST(Similarity, GradientsMatchFiniteDifferences)
{
    Rng rng(5);
    for (int t = 0; t < 20; ++t) {
        Matrix a = oracle::random_vector(rng, 9);
        Matrix b = oracle::random_vector(rng, 9);
        const auto cg = cosine_with_grad(a.col(0), b.col(0));
        const auto pg = pearson_with_grad(a.col(0), b.col(0));
        for (Eigen::Index k = 0; k < 9; ++k) {
            const double nc = oracle::central_difference(a, k, 1e-5, [&] { return cosine_similarity(a.col(0), b.col(0)); });
            const double np = oracle::central_difference(b, k, 1e-5, [&] { return pearson(a.col(0), b.col(0)); });
            EXPECT_LT(oracle::relative_error(cg.d_a(k), nc), 1e-6);
            EXPECT_LT(oracle::relative_error(pg.d_b(k), np), 1e-6);
        }
    }
}

TEST(Transition, DefinitionAndAntisymmetry)
{
    EXPECT_TRUE(transition(vec({1, 1}), vec({3, 0})).isApprox(vec({2, -1})));
    const Vector a = vec({0.5, -2.0, 7.25});
    EXPECT_TRUE(transition(a, a).isZero(0.0));
    Rng rng(3);
    for (int t = 0; t < 50; ++t) {
        const Vector x = oracle::random_vector(rng, 12);
        const Vector y = oracle::random_vector(rng, 12);
        EXPECT_TRUE((transition(x, y) + transition(y, x)).isZero(0.0));
    }
    EXPECT_THROW(transition(vec({1, 2}), vec({1})), ArgumentError);
}

TEST(AverageTransition, IdenticalAndNegatedPairs)
{
    const ModalityFeatures s1{vec({0, 0, 0}), vec({1, 2, 4}), vec({0, 0, 0})};
    const ModalityFeatures s2 = s1;
    const ModalityFeatures s3{vec({0, 0, 0}), vec({-1, -2, -4}), vec({0, 0, 0})};
    const TransitionPair p{ModalityId::Rgb, ModalityId::Ir};
    const std::vector<ModalityFeatures> same{s1, s2};
    const std::vector<ModalityFeatures> opposite{s1, s3};
    EXPECT_NEAR(average_transition_correlation(same, p), 1.0, 1e-12);
    EXPECT_NEAR(average_transition_correlation(opposite, p), -1.0, 1e-12);
    const std::vector<ModalityFeatures> single{s1};
    EXPECT_THROW(average_transition_correlation(single, p), ArgumentError);
}

TEST(AverageTransition, MatchesPairLoopOracle)
{
    Rng rng(99);
    for (int t = 0; t < 40; ++t) {
        const auto n = 2 + static_cast<Eigen::Index>(rng.below(49));
        const FeatureBatch b = oracle::random_batch(rng, 8, n);
        std::vector<ModalityFeatures> samples;
        for (Eigen::Index j = 0; j < n; ++j) {
            samples.push_back(b.sample(j));
        }
        const auto ref = oracle::from_batch(b);
        for (auto p : kTransitionPairs) {
            EXPECT_NEAR(average_transition_correlation(samples, p), oracle::average_transition_correlation(ref, p),
                        1e-12);
        }
    }
}

}  // namespace
}  // namespace ctnet
