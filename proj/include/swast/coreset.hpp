// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "swast/dataset.hpp"
#include "swast/events.hpp"
#include "swast/model.hpp"
#include "swast/tensor.hpp"

namespace swast {

// Selected sample ids (sorted, unique) with nonnegative weights.
struct CoresetState {
    std::vector<std::size_t> indices;
    std::vector<double> weights;
    double alpha = 1.0;

    std::size_t size() const { return indices.size(); }
    static CoresetState full(std::size_t n);

    bool operator==(const CoresetState&) const = default;
};

struct ScoreTable {
    std::vector<double> scores;
    std::vector<std::size_t> classes;
};

/// ceil(alpha * n); alpha must lie in (0, 1].
std::size_t coreset_budget(double alpha, std::size_t n);

/// Splits `budget` across classes in proportion to their frequency
/// (largest remainder, ties to the lower class id).
std::vector<std::size_t> class_budgets(const std::vector<std::size_t>& labels, std::size_t class_count,
                                       std::size_t budget);

// ---------------------------------------------------------------------------
// EL2N

/// score_i = || softmax(f(x_i)) - onehot(y_i) ||^2, in [0, 2].
ScoreTable el2n_score(const SparseModel& model, const Dataset& data);

/// Per-class budgets; before the midpoint of training the highest scores are
/// kept, from the midpoint on the lowest.
CoresetState el2n_select(const ScoreTable& scores, double alpha, std::size_t epoch,
                         std::size_t total_epochs);

// ---------------------------------------------------------------------------
// Moderate

/// Distance of each embedding to its class mean embedding.
ScoreTable moderate_scores(const Tensor2& embeddings, const std::vector<std::size_t>& labels,
                           std::size_t class_count);

/// Per class, keeps the samples whose score is closest to the class median.
CoresetState moderate_select_scores(const ScoreTable& scores, std::size_t class_count, double alpha);

/// Moderate selection on the model's last hidden activation.
/// Throws InvalidInput for a model without hidden layers.
CoresetState moderate_select(const SparseModel& model, const Dataset& data, double alpha);

// ---------------------------------------------------------------------------
// Gradient matching

/// Row i: gradient of the cross-entropy of sample i with respect to the
/// classifier weights (row-major, out x in) followed by its bias.
Tensor2 per_sample_grads(const SparseModel& model, const Dataset& data);

struct OmpOptions {
    double l2_reg = 1e-4;
    double tol = 1e-8;
    bool per_class = false;
};

struct OmpTrace {
    std::vector<std::size_t> picks;         // in selection order
    std::vector<double> residual_norms;     // after each refit
};

/// Orthogonal matching pursuit toward the mean row of G.
///
/// Each step adds the unselected row with the largest |<residual, g_i>|, then
/// refits nonnegative weights: ridge least squares on the selected rows,
/// negatives clipped to 0, one ridge refit on the surviving support, any
/// remaining negatives clipped. A refit that would raise the residual norm is
/// rejected in favour of the previous weights. Stops at the budget or when
/// the residual norm drops to tol. An all-zero G yields the lowest-index rows
/// with weight 0 and a "degenerate_selection" event.
CoresetState omp_gradmatch(const Tensor2& G, double alpha, double l2_reg, double tol,
                           OmpTrace* trace = nullptr, EventLog* events = nullptr);

/// GradMatch over the dataset, globally or per class (opts.per_class).
CoresetState gradmatch_select(const SparseModel& model, const Dataset& data, double alpha,
                              const OmpOptions& opts, EventLog* events = nullptr);

/// Fraction of the coreset whose noise flag is set; 0 for an empty coreset.
double noise_fraction(const CoresetState& coreset, const std::vector<bool>& noise_flags);

} // namespace swast
