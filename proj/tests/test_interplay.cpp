// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "swast/errors.hpp"
#include "swast/interplay.hpp"

using namespace swast;

namespace {

// Normal-equations oracle: Gaussian elimination on V^T V c = V^T y with
// partial pivoting, in long double.
std::vector<double> normal_equations_fit(const std::vector<InterplaySample>& s, std::size_t degree) {
    const std::size_t p = degree + 1;
    std::vector<std::vector<long double>> A(p, std::vector<long double>(p + 1, 0.0L));
    for (const auto& pt : s) {
        std::vector<long double> v(p);
        long double pw = 1.0L;
        for (std::size_t j = 0; j < p; ++j) {
            v[j] = pw;
            pw *= pt.x;
        }
        for (std::size_t a = 0; a < p; ++a) {
            for (std::size_t b = 0; b < p; ++b) A[a][b] += v[a] * v[b];
            A[a][p] += v[a] * pt.y;
        }
    }
    for (std::size_t c = 0; c < p; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < p; ++r)
            if (std::fabs(A[r][c]) > std::fabs(A[piv][c])) piv = r;
        std::swap(A[c], A[piv]);
        for (std::size_t r = 0; r < p; ++r) {
            if (r == c) continue;
            const long double f = A[r][c] / A[c][c];
            for (std::size_t k = c; k <= p; ++k) A[r][k] -= f * A[c][k];
        }
    }
    std::vector<double> out(p);
    for (std::size_t j = 0; j < p; ++j) out[j] = static_cast<double>(A[j][p] / A[j][j]);
    return out;
}

} // namespace

TEST(Runge, Values) {
    EXPECT_EQ(runge(0.0), 1.0);
    EXPECT_NEAR(runge(1.0), 1.0 / 26.0, 1e-16);
    for (double x = -1.0; x <= 1.0; x += 0.0137) EXPECT_EQ(runge(x), runge(-x));
}

TEST(SampleInterplay, GridFlagsAndDeterminism) {
    Rng a(3), b(3);
    auto s = sample_interplay(10, 0.5, 0.1, a);
    ASSERT_EQ(s.size(), 10u);
    EXPECT_EQ(s.front().x, -1.0);
    EXPECT_EQ(s.back().x, 1.0);
    std::size_t flagged = 0;
    for (const auto& p : s) {
        flagged += p.is_noisy;
        if (!p.is_noisy) EXPECT_EQ(p.y, runge(p.x));
    }
    EXPECT_EQ(flagged, 5u);
    auto t = sample_interplay(10, 0.5, 0.1, b);
    for (std::size_t i = 0; i < s.size(); ++i) {
        EXPECT_EQ(s[i].y, t[i].y);
        EXPECT_EQ(s[i].is_noisy, t[i].is_noisy);
    }
    Rng c(4);
    for (const auto& p : sample_interplay(8, 0.5, 0.0, c)) EXPECT_EQ(p.y, runge(p.x));
    EXPECT_THROW(sample_interplay(1, 0.5, 0.1, c), InvalidInput);
}

TEST(Polyfit, ExactLine) {
    auto f = polyfit_ls({{0, 0, false}, {1, 1, false}}, 1);
    ASSERT_EQ(f.coefficients.size(), 2u);
    EXPECT_NEAR(f.coefficients[0], 0.0, 1e-14);
    EXPECT_NEAR(f.coefficients[1], 1.0, 1e-14);
}

TEST(Polyfit, InterpolatesWhenDegreeAllows) {
    Rng rng(5);
    for (std::size_t n = 2; n <= 10; ++n) {
        auto s = sample_interplay(n, 0.5, 0.1, rng);
        for (std::size_t deg : {n - 1, n + 2}) {
            auto f = polyfit_ls(s, deg);
            double ynorm = 0;
            for (const auto& p : s) ynorm += p.y * p.y;
            for (const auto& p : s) EXPECT_LE(std::abs(f(p.x) - p.y), 1e-8 * std::sqrt(ynorm));
        }
    }
}

TEST(Polyfit, MatchesNormalEquationsOracle) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        auto s = sample_interplay(12, 0.5, 0.1, rng);
        auto f = polyfit_ls(s, 6);
        auto o = normal_equations_fit(s, 6);
        double num = 0, den = 0;
        for (std::size_t j = 0; j < o.size(); ++j) {
            num += (f.coefficients[j] - o[j]) * (f.coefficients[j] - o[j]);
            den += o[j] * o[j];
        }
        EXPECT_LE(std::sqrt(num / den), 1e-6);
    }
}

TEST(Polyfit, DegreeTenOnTenPointsMatchesOracleAtSamples) {
    // Underdetermined: compare predictions rather than coefficients (the
    // minimum-norm rule picks one of many exact interpolants).
    Rng rng(1);
    auto s = sample_interplay(10, 0.5, 0.1, rng);
    auto f = polyfit_ls(s, 10);
    auto o = PolynomialFit{9, normal_equations_fit(s, 9)};
    for (const auto& p : s) EXPECT_NEAR(f(p.x), o(p.x), 1e-6);
}

TEST(Polyfit, ResidualOrthogonalToColumnSpace) {
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        auto s = sample_interplay(30, 0.5, 0.1, rng);
        const std::size_t deg = 1 + rng.index(8);
        auto f = polyfit_ls(s, deg);
        for (std::size_t j = 0; j <= deg; ++j) {
            double acc = 0;
            for (const auto& p : s) acc += (f(p.x) - p.y) * std::pow(p.x, double(j));
            EXPECT_NEAR(acc, 0.0, 1e-8);
        }
    }
}

TEST(PolyMse, Cases) {
    PolynomialFit zero{0, {0.0}};
    EXPECT_EQ(poly_mse(zero, {{0, 1, false}, {0.5, 1, false}}), 1.0);
    PolynomialFit line{1, {1.0, 2.0}}; // 1 + 2x
    // residuals at x=0,1,-1 vs y=0,0,0: 1, 3, -1 -> (1 + 9 + 1) / 3
    EXPECT_NEAR(poly_mse(line, {{0, 0, false}, {1, 0, false}, {-1, 0, false}}), 11.0 / 3.0, 1e-15);
    EXPECT_THROW(poly_mse(zero, {}), InvalidInput);
    auto s = runge_grid(5);
    EXPECT_NEAR(poly_mse(polyfit_ls(s, 4), s), 0.0, 1e-10);
}

TEST(PruneExperiment, KZeroGivesUnprunedLosses) {
    Rng rng(2);
    PruneExperimentConfig cfg;
    cfg.k_zero = 0;
    auto r = prune_experiment(cfg, rng);
    EXPECT_EQ(r.loss_pruned_noisyfit, r.loss_noisyfit);
    EXPECT_EQ(r.loss_pruned_cleanfit, r.loss_cleanfit);
    EXPECT_EQ(r.curves.size(), 200u);
}

TEST(PruneExperiment, NoNoiseBranchesAreComparable) {
    Rng rng(2);
    PruneExperimentConfig cfg;
    cfg.noise_std = 0.0;
    auto r = prune_experiment(cfg, rng);
    const double hi = std::max(r.loss_pruned_noisyfit, r.loss_pruned_cleanfit);
    const double lo = std::min(r.loss_pruned_noisyfit, r.loss_pruned_cleanfit);
    EXPECT_LE(hi, 10.0 * lo + 1e-12);
}

TEST(PruneExperiment, SeededDefaultRunNoisyIsWorse) {
    Rng rng(0);
    auto r = prune_experiment(PruneExperimentConfig{}, rng);
    EXPECT_GT(r.loss_pruned_noisyfit, r.loss_pruned_cleanfit);
    EXPECT_EQ(r.noisy_pruned.coefficients.size(), 11u);
    std::size_t zeros = 0;
    for (double c : r.noisy_pruned.coefficients) zeros += c == 0.0;
    EXPECT_GE(zeros, 3u);
}

// ---------------------------------------------------------------------------
// discrepancy estimate

TEST(Idd, IdenticalSetsGiveExactlyZero) {
    Rng rng(1);
    auto s = sample_interplay(20, 0.5, 0.1, rng);
    for (std::size_t k : {1u, 5u, 12u}) EXPECT_EQ(estimate_idd(s, s, k).value, 0.0);
}

TEST(Idd, DegreeZeroHandCase) {
    // L(c) = (c^2 + (c-2)^2) / 2, L_hat = c^2; ratio = 2|c-1| / ((c-1)^2 + 1) peaks at 1.
    std::vector<InterplaySample> D{{0, 0, false}, {0, 2, false}}, Dh{{0, 0, false}};
    EventLog log;
    auto e = estimate_idd(D, Dh, 0, {}, &log);
    EXPECT_GE(e.value, 1.0 - 1e-6);
    EXPECT_LE(e.value, 1.0 + 1e-12);
    EXPECT_FALSE(e.floor_activated); // L >= 1 everywhere
}

TEST(Idd, FloorActivationIsFlagged) {
    std::vector<InterplaySample> D{{0, 0, false}}, Dh{{0, 1, false}};
    EventLog log;
    auto e = estimate_idd(D, Dh, 0, {}, &log);
    EXPECT_TRUE(e.floor_activated);
    EXPECT_TRUE(has_event(log, "denominator_floor"));
    EXPECT_GE(e.value, 1e11);
}

TEST(Idd, NonNegativeAndMonotoneInRestarts) {
    Rng rng(4);
    auto D = sample_interplay(30, 1.0, 0.1, rng);
    auto Dh = sample_interplay(12, 0.0, 0.0, rng);
    for (std::size_t k : {2u, 6u, 10u}) {
        double prev = -1.0;
        for (std::size_t r : {0u, 1u, 2u, 4u, 8u}) {
            IddOptions o;
            o.restarts = r;
            o.steps = 50;
            o.seed = 7;
            const double v = estimate_idd(D, Dh, k, o).value;
            EXPECT_GE(v, 0.0);
            EXPECT_GE(v, prev);
            prev = v;
        }
    }
}

TEST(Idd, ArgmaxReproducesValue) {
    Rng rng(6);
    auto D = sample_interplay(25, 1.0, 0.1, rng);
    auto Dh = sample_interplay(10, 0.0, 0.0, rng);
    auto e = estimate_idd(D, Dh, 4);
    PolynomialFit f{4, e.argmax};
    const double L = poly_mse(f, D), Lh = poly_mse(f, Dh);
    EXPECT_NEAR(std::abs(L - Lh) / L, e.value, 1e-6 * std::max(1.0, e.value));
}

TEST(IddSweep, RowsDeterministicNonNegative) {
    IddSweepConfig cfg;
    cfg.idd.restarts = 2;
    cfg.idd.steps = 30;
    Rng a(7), b(7);
    auto r1 = idd_sweep(cfg, a);
    auto r2 = idd_sweep(cfg, b);
    ASSERT_EQ(r1.size(), 20u);
    for (std::size_t i = 0; i < r1.size(); ++i) {
        EXPECT_EQ(r1[i].degree, i + 1);
        EXPECT_GE(r1[i].value, 0.0);
        EXPECT_EQ(r1[i].value, r2[i].value);
    }
    cfg.basis = IddLossBasis::TestGrid;
    Rng c(7);
    EXPECT_EQ(idd_sweep(cfg, c).size(), 20u);
}
