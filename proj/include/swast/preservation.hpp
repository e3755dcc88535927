// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "swast/coreset.hpp"
#include "swast/dataset.hpp"
#include "swast/model.hpp"
#include "swast/network.hpp"

namespace swast {

// Raw logits recorded for each coreset sample right after selection.
struct PreservedState {
    std::map<std::size_t, std::vector<double>> logits;

    std::size_t size() const { return logits.size(); }
    bool operator==(const PreservedState&) const = default;
};

/// Logits of the current model on every coreset sample, misclassified ones included.
PreservedState record_state(const SparseModel& model, const CoresetState& coreset, const Dataset& data);

struct CompositeLoss {
    double total = 0.0;
    double ce = 0.0;
    double sp = 0.0;
    std::size_t missing = 0; // batch ids without a preserved record
    Tensor2 dlogits;         // d total / d logits
};

/// total = mean CE + lambda * mean_i KL(softmax(z_i) || softmax(f(x_i))).
///
/// `preserved` may be null (no state preservation). Samples without a record
/// contribute 0 to the KL mean. Stored logits are constants: gradients flow
/// only through the current logits.
CompositeLoss composite_loss_from_logits(const Tensor2& logits, const Batch& batch,
                                         const PreservedState* preserved, double lambda);

CompositeLoss composite_loss(const SparseModel& model, const Batch& batch, const PreservedState* preserved,
                             double lambda);

} // namespace swast
