// SPDX-License-Identifier: Apache-2.0
#include "swast/preservation.hpp"

#include "swast/errors.hpp"
#include "swast/ops.hpp"

namespace swast {

PreservedState record_state(const SparseModel& model, const CoresetState& coreset, const Dataset& data) {
    if (coreset.indices.empty()) throw InvalidInput("record_state: empty coreset");
    auto logits = forward(model, data.batch(coreset.indices)).logits;
    PreservedState s;
    for (std::size_t r = 0; r < coreset.indices.size(); ++r) {
        auto row = logits.row(r);
        s.logits.emplace(coreset.indices[r], std::vector<double>(row.begin(), row.end()));
    }
    return s;
}

CompositeLoss composite_loss_from_logits(const Tensor2& logits, const Batch& batch, const PreservedState* preserved,
                                         double lambda) {
    if (logits.rows != batch.size() || batch.labels.size() != batch.size())
        throw InvalidInput("composite_loss: batch/logit size mismatch");
    CompositeLoss out;
    out.dlogits = Tensor2(logits.rows, logits.cols);
    const std::size_t n = logits.rows;
    if (n == 0) return out;
    const double inv_n = 1.0 / static_cast<double>(n);

    for (std::size_t r = 0; r < n; ++r) {
        const auto q = softmax(logits.row(r));
        const std::size_t y = batch.labels[r];
        out.ce += cross_entropy(q, y);
        for (std::size_t c = 0; c < q.size(); ++c) out.dlogits(r, c) = (q[c] - (c == y ? 1.0 : 0.0)) * inv_n;

        if (!preserved) continue;
        const auto it = preserved->logits.find(batch.sample_ids.at(r));
        if (it == preserved->logits.end()) {
            ++out.missing;
            continue;
        }
        if (it->second.size() != q.size()) throw InvalidInput("composite_loss: stored logits have wrong width");
        const auto p = softmax(it->second);
        out.sp += kl_divergence(p, q);
        // d/dz KL(p || softmax(z)) = softmax(z) - p
        for (std::size_t c = 0; c < q.size(); ++c) out.dlogits(r, c) += lambda * (q[c] - p[c]) * inv_n;
    }
    out.ce *= inv_n;
    out.sp *= inv_n;
    out.total = out.ce + lambda * out.sp;
    return out;
}

CompositeLoss composite_loss(const SparseModel& model, const Batch& batch, const PreservedState* preserved,
                             double lambda) {
    return composite_loss_from_logits(forward(model, batch).logits, batch, preserved, lambda);
}

} // namespace swast
