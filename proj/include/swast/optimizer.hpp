// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "swast/model.hpp"
#include "swast/network.hpp"

namespace swast {

struct OptimizerConfig {
    double lr = 0.05;
    double momentum = 0.9;
    double weight_decay = 5e-4;
    bool nesterov = true;
    bool cosine = true;
};

// Momentum buffers shaped like the model's parameters.
struct SgdState {
    std::vector<std::vector<double>> weight_momentum;
    std::vector<std::vector<double>> bias_momentum;

    static SgdState zeros_like(const SparseModel& model);
    bool operator==(const SgdState&) const = default;
};

/// Learning rate for 1-based `epoch` of `total_epochs` (cosine-annealed if enabled).
double epoch_learning_rate(const OptimizerConfig& cfg, std::size_t epoch, std::size_t total_epochs);

/// SGD with (Nesterov) momentum and weight decay on active weights and all
/// biases. Masked-off positions get no gradient, no decay, and a zeroed
/// buffer; masks are re-enforced afterwards.
void sgd_step(SparseModel& model, SgdState& state, const Gradients& grads, const OptimizerConfig& cfg,
              double lr);

} // namespace swast
