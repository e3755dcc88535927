// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "swast/events.hpp"
#include "swast/model.hpp"
#include "swast/network.hpp"
#include "swast/sparsity.hpp"

namespace swast {

struct RigLConfig {
    std::size_t delta_t = 100;
    std::size_t t_end = 0; // 0: resolved to 75% of the planned optimizer steps
    double drop_fraction = 0.3;
    SparsityPlan plan;
};

/// Cosine-annealed update fraction (alpha / 2)(1 + cos(t pi / t_end)); 0 past t_end.
double f_decay(double t, double alpha, double t_end);

struct RigLLayerUpdate {
    std::size_t layer = 0;
    std::size_t requested = 0;
    std::size_t moved = 0; // dropped == grown
};

struct RigLReport {
    std::vector<RigLLayerUpdate> layers;
    bool clamped = false;
};

/// True when step t is a RigL update step under cfg.
bool rigl_due(std::size_t t, const RigLConfig& cfg);

/// One drop/grow round on each layer in `layers`.
///
/// Drops the k = round(f_decay(t) * active) active weights of smallest |W| and
/// activates the k inactive positions with the largest |grad| (positions just
/// dropped are excluded), initialising them to exactly 0. Ties go to the lowest
/// flat index. If k exceeds the inactive pool it is clamped and a "rigl_clamp"
/// event is logged. Active counts are unchanged.
RigLReport rigl_update(SparseModel& model, const Gradients& dense_grads, std::size_t t,
                       const RigLConfig& cfg, const std::vector<std::size_t>& layers,
                       EventLog* events = nullptr);

/// Zeroes the k_zero entries of smallest magnitude (ties: lowest index).
std::vector<double> magnitude_prune(std::vector<double> values, std::size_t k_zero);

} // namespace swast
