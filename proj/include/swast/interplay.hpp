// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "swast/events.hpp"
#include "swast/rng.hpp"

namespace swast {

struct InterplaySample {
    double x = 0.0;
    double y = 0.0;
    bool is_noisy = false;
};

// Polynomial with coefficients in ascending powers.
struct PolynomialFit {
    std::size_t degree = 0;
    std::vector<double> coefficients;

    double operator()(double x) const;
};

/// 1 / (1 + 25 x^2).
double runge(double x);

/// `n_points` equally spaced x on [-1, 1], y = runge(x). round(fraction * n)
/// samples, drawn without replacement, get N(0, noise_std^2) added to y and
/// are flagged.
std::vector<InterplaySample> sample_interplay(std::size_t n_points, double noisy_fraction, double noise_std,
                                              Rng& rng);

/// Least-squares fit through a complete orthogonal decomposition of the
/// Vandermonde system (minimum-norm when rank deficient).
PolynomialFit polyfit_ls(const std::vector<InterplaySample>& samples, std::size_t degree);

/// Mean squared residual. Throws InvalidInput on an empty set.
double poly_mse(const PolynomialFit& fit, const std::vector<InterplaySample>& samples);

/// Points on the true curve: `n` equally spaced x on [-1, 1], y = runge(x).
std::vector<InterplaySample> runge_grid(std::size_t n);

struct PruneExperimentConfig {
    std::size_t n_points = 10;
    double noisy_fraction = 0.5;
    double noise_std = 0.1;
    std::size_t degree = 10;
    std::size_t k_zero = 3;
    std::size_t grid_points = 200;
};

struct CurvePoint {
    double x = 0.0;
    double truth = 0.0;
    double noisy_fit = 0.0;
    double noisy_pruned = 0.0;
    double clean_fit = 0.0;
    double clean_pruned = 0.0;
};

struct PruneExperimentResult {
    double loss_pruned_noisyfit = 0.0;
    double loss_pruned_cleanfit = 0.0;
    double loss_noisyfit = 0.0;
    double loss_cleanfit = 0.0;
    PolynomialFit noisy_fit, clean_fit, noisy_pruned, clean_pruned;
    std::vector<InterplaySample> samples;
    std::vector<CurvePoint> curves;
};

/// Fits the full noisy set and its clean subset, prunes the k_zero smallest
/// coefficients of each, and scores both against runge on the grid.
PruneExperimentResult prune_experiment(const PruneExperimentConfig& cfg, Rng& rng);

struct IddOptions {
    std::size_t restarts = 8;
    std::size_t steps = 200;
    std::uint64_t seed = 0;
    double denominator_floor = 1e-12;
};

struct IddEstimate {
    double value = 0.0; // lower bound on sup |L - L_hat| / L
    bool floor_activated = false;
    std::vector<double> argmax; // coefficients (ascending powers) of the best candidate
};

/// Lower-bound estimate of sup_theta |L(theta) - L_hat(theta)| / L(theta) for
/// degree-`degree` polynomials, where L and L_hat are the MSE over D and
/// D_hat. Candidates: the least-squares fits on D and on D_hat, plus
/// `restarts` runs of adaptive-step preconditioned gradient ascent of
/// `steps` iterations each. Restart r is seeded from (seed, r) alone, so
/// more restarts only add candidates. Logs "denominator_floor" when L drops
/// below the floor at any evaluated candidate.
IddEstimate estimate_idd(const std::vector<InterplaySample>& D, const std::vector<InterplaySample>& D_hat,
                         std::size_t degree, const IddOptions& opts = {}, EventLog* events = nullptr);

enum class IddLossBasis {
    Dataset,  // L over the noisy set D
    TestGrid, // L over test_points grid points of the true function
};

struct IddSweepConfig {
    std::size_t n_noisy = 50;
    std::size_t n_clean = 20;
    std::size_t test_points = 100;
    double noise_std = 0.1;
    std::size_t min_degree = 1;
    std::size_t max_degree = 20;
    IddLossBasis basis = IddLossBasis::Dataset;
    IddOptions idd;
};

struct IddRow {
    std::size_t degree = 0;
    double value = 0.0;
    bool floor_activated = false;
};

/// D is n_noisy noisy samples of runge, D_hat n_clean clean ones; one
/// estimate per degree. Deterministic in the rng.
std::vector<IddRow> idd_sweep(const IddSweepConfig& cfg, Rng& rng, EventLog* events = nullptr);

} // namespace swast
