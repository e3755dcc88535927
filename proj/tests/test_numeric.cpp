// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "swast/errors.hpp"
#include "swast/model.hpp"
#include "swast/network.hpp"
#include "swast/numeric.hpp"
#include "swast/ops.hpp"
#include "swast/rng.hpp"
#include "test_util.hpp"

using namespace swast;
using swast::testing::random_batch;
using swast::testing::random_masks;
using swast::testing::random_model;

// ---------------------------------------------------------------------------
// ops

TEST(Softmax, SumsToOneAndIsShiftInvariant) {
    Rng rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> z(2 + rng.index(8));
        for (auto& v : z) v = rng.normal(0.0, 20.0);
        auto p = softmax(z);
        EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
        std::vector<double> shifted = z;
        for (auto& v : shifted) v += 1234.5;
        auto q = softmax(shifted);
        for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(p[i], q[i], 1e-12);
    }
}

TEST(Softmax, LargeLogitsStayFinite) {
    std::vector<double> z{1000.0, 0.0};
    auto p = softmax(z);
    EXPECT_DOUBLE_EQ(p[0], 1.0);
    EXPECT_TRUE(std::isfinite(p[1]));
}

TEST(Softmax, RejectsEmptyAndNonFinite) {
    EXPECT_THROW(softmax(std::vector<double>{}), InvalidInput);
    EXPECT_THROW(softmax(std::vector<double>{1.0, std::nan("")}), InvalidInput);
    EXPECT_THROW(softmax(std::vector<double>{std::numeric_limits<double>::infinity()}), InvalidInput);
}

TEST(LogSumExp, MatchesDirectFormula) {
    std::vector<double> z{0.5, -1.0, 2.0};
    EXPECT_NEAR(log_sum_exp(z), std::log(std::exp(0.5) + std::exp(-1.0) + std::exp(2.0)), 1e-14);
}

TEST(CrossEntropy, UniformTwoClassIsLogTwo) {
    EXPECT_NEAR(cross_entropy(std::vector<double>{0.5, 0.5}, 0), std::log(2.0), 1e-15);
}

TEST(CrossEntropy, ZeroProbabilityIsFloored) {
    EXPECT_NEAR(cross_entropy(std::vector<double>{1.0, 0.0}, 1), -std::log(kProbFloor), 1e-9);
}

TEST(CrossEntropy, LabelOutOfRangeThrows) {
    EXPECT_THROW(cross_entropy(std::vector<double>{0.5, 0.5}, 2), InvalidInput);
}

TEST(KlDivergence, IdenticalIsExactlyZero) {
    Rng rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> z(3 + rng.index(5));
        for (auto& v : z) v = rng.normal(0.0, 30.0);
        auto p = softmax(z);
        EXPECT_EQ(kl_divergence(p, p), 0.0);
    }
}

TEST(KlDivergence, NonNegativeAndMatchesHandValue) {
    std::vector<double> p{0.5, 0.5}, q{0.25, 0.75};
    const double expect = 0.5 * std::log(0.5 / 0.25) + 0.5 * std::log(0.5 / 0.75);
    EXPECT_NEAR(kl_divergence(p, q), expect, 1e-15);
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a(4), b(4);
        for (auto& v : a) v = rng.normal(0.0, 3.0);
        for (auto& v : b) v = rng.normal(0.0, 3.0);
        EXPECT_GE(kl_divergence(softmax(a), softmax(b)), -1e-15);
    }
}

TEST(CeilCount, ToleratesRoundingNoise) {
    EXPECT_EQ(ceil_count(300 * 0.1 / 2), 15u);
    EXPECT_EQ(ceil_count(15.2), 16u);
    EXPECT_EQ(ceil_count(0.0), 0u);
    EXPECT_EQ(ceil_count(0.3 * 10), 3u);
}

// ---------------------------------------------------------------------------
// rng

TEST(Rng, SameSeedSameStream) {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, StateRoundTripResumesStream) {
    Rng a(7);
    for (int i = 0; i < 13; ++i) a.normal();
    Rng b(0);
    b.restore(a.state());
    EXPECT_EQ(a, b);
    for (int i = 0; i < 50; ++i) EXPECT_EQ(a.normal(), b.normal());
}

TEST(Rng, RestoreRejectsGarbage) {
    Rng r;
    EXPECT_THROW(r.restore("not a state"), InvalidInput);
}

TEST(Rng, SampleWithoutReplacementIsDistinctAndInRange) {
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng.index(50);
        const std::size_t k = rng.index(n + 1);
        auto s = rng.sample_without_replacement(n, k);
        std::set<std::size_t> uniq(s.begin(), s.end());
        EXPECT_EQ(uniq.size(), k);
        for (auto v : s) EXPECT_LT(v, n);
    }
}

TEST(Rng, UniformAndNormalMoments) {
    Rng rng(11);
    double su = 0, sn = 0, sn2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        su += u;
        const double z = rng.normal();
        sn += z;
        sn2 += z * z;
    }
    EXPECT_NEAR(su / n, 0.5, 0.01);
    EXPECT_NEAR(sn / n, 0.0, 0.01);
    EXPECT_NEAR(sn2 / n, 1.0, 0.02);
}

TEST(Rng, MixSeedSeparatesStreams) {
    EXPECT_NE(mix_seed(1, 0), mix_seed(1, 1));
    EXPECT_NE(mix_seed(1, 0), mix_seed(2, 0));
    EXPECT_EQ(mix_seed(9, 3), mix_seed(9, 3));
}

// ---------------------------------------------------------------------------
// model

TEST(SparseModel, HeUniformInitBoundsAndZeroBias) {
    Rng rng(1);
    SparseModel m({5, 8, 3}, rng);
    ASSERT_EQ(m.layer_count(), 2u);
    EXPECT_EQ(m.input_width(), 5u);
    EXPECT_EQ(m.output_width(), 3u);
    const double b0 = std::sqrt(6.0 / 5.0);
    for (double w : m.layer(0).weight.data) EXPECT_LE(std::abs(w), b0);
    for (double b : m.layer(1).bias) EXPECT_EQ(b, 0.0);
    EXPECT_EQ(m.parameter_count(), 5u * 8 + 8 + 8 * 3 + 3);
}

TEST(SparseModel, RejectsBadShapes) {
    Rng rng(1);
    EXPECT_THROW(SparseModel(std::vector<std::size_t>{4}, rng), InvalidInput);
    EXPECT_THROW(SparseModel(std::vector<std::size_t>{4, 0, 2}, rng), InvalidInput);
    SparseModel m({3, 4, 2}, rng);
    auto layers = m.layers();
    std::swap(layers[0], layers[1]);
    EXPECT_THROW(SparseModel(layers, PruneScope::FcOnly), InvalidInput);
}

TEST(SparseModel, MutableAccessBumpsRevision) {
    Rng rng(1);
    SparseModel m({2, 3, 2}, rng);
    const auto r0 = m.revision();
    m.mutable_layer(0);
    EXPECT_GT(m.revision(), r0);
}

// ---------------------------------------------------------------------------
// forward / backward

TEST(Forward, MatchesDenseReferenceWithMasks) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        auto m = random_model({4, 7, 5, 3}, rng);
        random_masks(m, 0.6, rng);
        auto b = random_batch(6, 4, 3, rng);
        auto got = forward(m, b.inputs).logits;
        auto want = swast::testing::reference_forward(m, b.inputs);
        for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got.data[i], want.data[i], 1e-12);
    }
}

TEST(Forward, MaskedEntriesContributeNothingEvenIfWeightSet) {
    Rng rng(3);
    auto m = random_model({3, 4, 2}, rng);
    auto& l = m.mutable_layer(0);
    l.mask[0] = 0;
    l.weight.data[0] = 1e6; // deliberately stale
    auto b = random_batch(2, 3, 2, rng);
    auto got = forward(m, b.inputs).logits;
    auto want = swast::testing::reference_forward(m, b.inputs);
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got.data[i], want.data[i], 1e-9);
}

TEST(Forward, WrongInputWidthThrows) {
    Rng rng(3);
    SparseModel m({3, 4, 2}, rng);
    EXPECT_THROW(forward(m, Tensor2(1, 2)), InvalidInput);
}

// Independent oracle: central differences of the reference forward + CE.
TEST(Backward, MatchesIndependentFiniteDifferences) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(100 + seed);
        auto m = random_model({3, 6, 4, 3}, rng);
        random_masks(m, 0.7, rng);
        auto b = random_batch(5, 3, 3, rng);
        auto fwd = forward(m, b.inputs);
        auto lg = mean_cross_entropy(fwd.logits, b.labels);
        auto g = backward(m, fwd.cache, lg.dlogits);

        const double h = 1e-6;
        SparseModel probe = m;
        auto loss = [&] { return swast::testing::reference_mean_ce(swast::testing::reference_forward(probe, b.inputs), b.labels); };
        for (std::size_t l = 0; l < probe.layer_count(); ++l) {
            auto& L = probe.mutable_layer(l);
            for (std::size_t i = 0; i < L.weight.size(); ++i) {
                if (!L.mask[i]) continue;
                const double w = L.weight.data[i];
                L.weight.data[i] = w + h;
                const double up = loss();
                L.weight.data[i] = w - h;
                const double dn = loss();
                L.weight.data[i] = w;
                EXPECT_NEAR(g.weight[l].data[i], (up - dn) / (2 * h), 1e-7) << "seed " << seed;
            }
            for (std::size_t o = 0; o < L.bias.size(); ++o) {
                const double bv = L.bias[o];
                L.bias[o] = bv + h;
                const double up = loss();
                L.bias[o] = bv - h;
                const double dn = loss();
                L.bias[o] = bv;
                EXPECT_NEAR(g.bias[l][o], (up - dn) / (2 * h), 1e-7);
            }
        }
    }
}

TEST(Backward, DenseGradientIsReportedAtMaskedPositions) {
    Rng rng(9);
    auto m = random_model({3, 5, 2}, rng);
    auto& l = m.mutable_layer(1);
    std::fill(l.mask.begin(), l.mask.end(), std::uint8_t{0});
    l.mask[0] = 1;
    l.enforce_mask();
    auto b = random_batch(4, 3, 2, rng);
    auto fwd = forward(m, b.inputs);
    auto g = backward(m, fwd.cache, mean_cross_entropy(fwd.logits, b.labels).dlogits);
    bool any_nonzero = false;
    for (std::size_t i = 1; i < g.weight[1].size(); ++i) any_nonzero |= g.weight[1].data[i] != 0.0;
    EXPECT_TRUE(any_nonzero);
    auto gm = g.masked(m);
    for (std::size_t i = 1; i < gm.weight[1].size(); ++i) EXPECT_EQ(gm.weight[1].data[i], 0.0);
}

TEST(Backward, StaleCacheIsRejected) {
    Rng rng(4);
    auto m = random_model({2, 3, 2}, rng);
    auto b = random_batch(2, 2, 2, rng);
    auto fwd = forward(m, b.inputs);
    auto d = mean_cross_entropy(fwd.logits, b.labels).dlogits;
    m.mutable_layer(0).weight.data[0] += 1.0;
    EXPECT_THROW(backward(m, fwd.cache, d), InvalidState);
    SparseModel other = m;
    auto fwd2 = forward(m, b.inputs);
    EXPECT_THROW(backward(other, fwd2.cache, d), InvalidState);
}

TEST(GradCheck, QuadraticAndCrossEntropyAreTight) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Rng rng(seed);
        auto m = random_model({2, 16, 16, 3}, rng);
        random_masks(m, 0.5, rng);
        auto b = random_batch(4, 2, 3, rng);
        EXPECT_LT(grad_check(m, b, 1e-5), 1e-6);
        EXPECT_LT(grad_check(m, b, 1e-5, CheckLoss::Quadratic), 1e-6);
    }
}

TEST(GradCheck, EmptyBatchIsZero) {
    Rng rng(0);
    SparseModel m({2, 3, 2}, rng);
    Batch b;
    b.inputs = Tensor2(0, 2);
    EXPECT_EQ(grad_check(m, b, 1e-5), 0.0);
}

TEST(MeanQuadratic, HandValue) {
    Tensor2 z(1, 2);
    z(0, 0) = 1.0;
    z(0, 1) = 2.0;
    auto r = mean_quadratic(z, {1});
    EXPECT_DOUBLE_EQ(r.loss, 0.5 * (1.0 + 1.0));
    EXPECT_DOUBLE_EQ(r.dlogits(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(r.dlogits(0, 1), 1.0);
}
