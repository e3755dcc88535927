// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "swast/model.hpp"
#include "swast/rng.hpp"

namespace swast {

enum class Distribution { Uniform, ERK };

struct SparsityPlan {
    double target_rate = 0.0; // sparsity of the scoped layers (backbone under FullNetwork)
    Distribution distribution = Distribution::ERK;
    PruneScope scope = PruneScope::FcOnly;
    double fc_fixed_rate = 0.9; // classifier sparsity under FullNetwork
};

struct LayerDims {
    std::size_t in = 0;
    std::size_t out = 0;
    std::size_t kernel_w = 1;
    std::size_t kernel_h = 1;

    std::size_t params() const { return in * out * kernel_w * kernel_h; }
};

/// Unscaled Erdos-Renyi-Kernel sparsity 1 - (n_in + n_out + w + h) / (n_in n_out w h).
double erk_raw_sparsity(const LayerDims& d);

/// Per-layer densities for the given layers.
///
/// Uniform keeps the first layer dense and gives every other layer density
/// 1 - target_rate. ERK scales density with the raw ERK score, rescaled so the
/// parameter-weighted sparsity over all given layers equals target_rate;
/// layers that would exceed density 1 are made dense and the rest rescaled.
/// Throws ConfigError when the rescale is infeasible.
std::vector<double> layer_densities(const SparsityPlan& plan, const std::vector<LayerDims>& dims);

/// Densities for every layer of an MLP with these widths, honouring the
/// plan's scope: FcOnly sparsifies only the classifier at target_rate;
/// FullNetwork distributes target_rate over the backbone and fixes the
/// classifier at fc_fixed_rate.
std::vector<double> model_densities(const SparsityPlan& plan, const SparseModel& model);

/// round-half-up(density * size), clamped to [1, size].
std::size_t active_target(double density, std::size_t size);

/// Draws each layer's active set uniformly without replacement and zeroes
/// masked weights.
void init_masks(SparseModel& model, const std::vector<double>& densities, Rng& rng);

struct SparsityReport {
    double scoped = 0.0; // over the prunable layers only
    double whole = 0.0;  // over every weight in the model
};

SparsityReport actual_sparsity(const SparseModel& model);

/// Indices of prunable layers: the classifier only for FcOnly, all layers for
/// FullNetwork.
std::vector<std::size_t> apply_scope(std::size_t layer_count, PruneScope scope);
inline std::vector<std::size_t> apply_scope(const SparseModel& model) {
    return apply_scope(model.layer_count(), model.prune_scope());
}

} // namespace swast
