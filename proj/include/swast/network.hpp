// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "swast/model.hpp"
#include "swast/tensor.hpp"

namespace swast {

// Per-layer values retained by forward() for backward().
// activations[0] is the input; activations[l + 1] is the output of layer l
// (ReLU applied for hidden layers, raw logits for the last one).
struct ForwardCache {
    std::vector<Tensor2> pre_activations;
    std::vector<Tensor2> activations;
    std::uint64_t model_revision = 0;
    const SparseModel* model = nullptr;

    std::size_t layer_count() const { return pre_activations.size(); }
    /// Output of the last hidden layer; the input itself for a 1-layer model.
    const Tensor2& embedding() const { return activations[activations.size() - 2]; }
};

struct ForwardResult {
    Tensor2 logits;
    ForwardCache cache;
};

// Dense gradients, including masked-off positions.
struct Gradients {
    std::vector<Tensor2> weight;
    std::vector<std::vector<double>> bias;

    /// Copy with masked-off weight gradients zeroed.
    Gradients masked(const SparseModel& model) const;
};

ForwardResult forward(const SparseModel& model, const Tensor2& inputs);
inline ForwardResult forward(const SparseModel& model, const Batch& batch) {
    return forward(model, batch.inputs);
}

/// Backpropagates dlogits through the cached pass. Throws InvalidState if
/// the model changed since the cache was produced.
Gradients backward(const SparseModel& model, const ForwardCache& cache, const Tensor2& dlogits);

// ---------------------------------------------------------------------------
// Scalar losses over a batch of logits, with their logit gradients.

struct LossAndGrad {
    double loss = 0.0;
    Tensor2 dlogits;
};

/// Mean softmax cross-entropy.
LossAndGrad mean_cross_entropy(const Tensor2& logits, const std::vector<std::size_t>& labels);

/// 0.5 * mean squared distance between logits and one-hot labels.
LossAndGrad mean_quadratic(const Tensor2& logits, const std::vector<std::size_t>& labels);

enum class CheckLoss { CrossEntropy, Quadratic };

/// Central finite-difference audit of backward() over all active weights and
/// biases. Returns max |g_fd - g_an| / max(1, |g_fd|); 0 for an empty batch.
double grad_check(const SparseModel& model, const Batch& batch, double h,
                  CheckLoss loss = CheckLoss::CrossEntropy);

} // namespace swast
