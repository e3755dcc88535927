// SPDX-License-Identifier: Apache-2.0
#include "swast/network.hpp"

#include <algorithm>
#include <cmath>

#include "swast/errors.hpp"
#include "swast/ops.hpp"

namespace swast {

Gradients Gradients::masked(const SparseModel& model) const {
    Gradients g = *this;
    for (std::size_t l = 0; l < g.weight.size(); ++l) {
        const auto& mask = model.layer(l).mask;
        for (std::size_t i = 0; i < mask.size(); ++i)
            if (mask[i] == 0) g.weight[l].data[i] = 0.0;
    }
    return g;
}

ForwardResult forward(const SparseModel& model, const Tensor2& inputs) {
    if (model.layer_count() == 0) throw InvalidInput("forward: empty model");
    if (inputs.cols != model.input_width())
        throw InvalidInput("forward: input width " + std::to_string(inputs.cols) + " does not match model input " +
                           std::to_string(model.input_width()));

    ForwardResult res;
    auto& cache = res.cache;
    cache.model = &model;
    cache.model_revision = model.revision();
    cache.activations.push_back(inputs);

    const std::size_t n = inputs.rows;
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        const SparseLayer& layer = model.layer(l);
        const Tensor2& a = cache.activations.back();
        Tensor2 z(n, layer.out());
        for (std::size_t r = 0; r < n; ++r) {
            auto ar = a.row(r);
            for (std::size_t o = 0; o < layer.out(); ++o) {
                double s = layer.bias[o];
                const std::size_t base = o * layer.in();
                for (std::size_t i = 0; i < layer.in(); ++i)
                    if (layer.mask[base + i]) s += layer.weight.data[base + i] * ar[i];
                z(r, o) = s;
            }
        }
        Tensor2 act = z;
        if (l + 1 < model.layer_count())
            for (double& v : act.data) v = v > 0.0 ? v : 0.0;
        cache.pre_activations.push_back(std::move(z));
        cache.activations.push_back(std::move(act));
    }
    res.logits = cache.activations.back();
    return res;
}

Gradients backward(const SparseModel& model, const ForwardCache& cache, const Tensor2& dlogits) {
    if (cache.model != &model || cache.model_revision != model.revision() ||
        cache.layer_count() != model.layer_count())
        throw InvalidState("backward: forward cache does not belong to the current model state");
    const std::size_t n = cache.activations.front().rows;
    if (dlogits.rows != n || dlogits.cols != model.output_width())
        throw InvalidInput("backward: dlogits shape mismatch");

    const std::size_t L = model.layer_count();
    Gradients g;
    g.weight.resize(L);
    g.bias.resize(L);

    Tensor2 dz = dlogits;
    for (std::size_t li = L; li-- > 0;) {
        const SparseLayer& layer = model.layer(li);
        const Tensor2& a = cache.activations[li];
        Tensor2 dW(layer.out(), layer.in());
        std::vector<double> db(layer.out(), 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            auto ar = a.row(r);
            for (std::size_t o = 0; o < layer.out(); ++o) {
                const double d = dz(r, o);
                db[o] += d;
                if (d == 0.0) continue;
                double* w = dW.data.data() + o * layer.in();
                for (std::size_t i = 0; i < layer.in(); ++i) w[i] += d * ar[i];
            }
        }
        g.weight[li] = std::move(dW);
        g.bias[li] = std::move(db);

        if (li == 0) break;
        const Tensor2& prev_pre = cache.pre_activations[li - 1];
        Tensor2 da(n, layer.in());
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t o = 0; o < layer.out(); ++o) {
                const double d = dz(r, o);
                if (d == 0.0) continue;
                const std::size_t base = o * layer.in();
                for (std::size_t i = 0; i < layer.in(); ++i)
                    if (layer.mask[base + i]) da(r, i) += layer.weight.data[base + i] * d;
            }
            // ReLU; the subgradient at 0 is 0.
            for (std::size_t i = 0; i < layer.in(); ++i)
                if (!(prev_pre(r, i) > 0.0)) da(r, i) = 0.0;
        }
        dz = std::move(da);
    }
    return g;
}

// ---------------------------------------------------------------------------

LossAndGrad mean_cross_entropy(const Tensor2& logits, const std::vector<std::size_t>& labels) {
    if (labels.size() != logits.rows) throw InvalidInput("mean_cross_entropy: label count mismatch");
    LossAndGrad out;
    out.dlogits = Tensor2(logits.rows, logits.cols);
    if (logits.rows == 0) return out;
    const double inv_n = 1.0 / static_cast<double>(logits.rows);
    for (std::size_t r = 0; r < logits.rows; ++r) {
        auto p = softmax(logits.row(r));
        out.loss += cross_entropy(p, labels[r]);
        for (std::size_t c = 0; c < logits.cols; ++c)
            out.dlogits(r, c) = (p[c] - (c == labels[r] ? 1.0 : 0.0)) * inv_n;
    }
    out.loss *= inv_n;
    return out;
}

LossAndGrad mean_quadratic(const Tensor2& logits, const std::vector<std::size_t>& labels) {
    if (labels.size() != logits.rows) throw InvalidInput("mean_quadratic: label count mismatch");
    LossAndGrad out;
    out.dlogits = Tensor2(logits.rows, logits.cols);
    if (logits.rows == 0) return out;
    const double inv_n = 1.0 / static_cast<double>(logits.rows);
    for (std::size_t r = 0; r < logits.rows; ++r) {
        if (labels[r] >= logits.cols) throw InvalidInput("mean_quadratic: label out of range");
        for (std::size_t c = 0; c < logits.cols; ++c) {
            const double diff = logits(r, c) - (c == labels[r] ? 1.0 : 0.0);
            out.loss += 0.5 * diff * diff;
            out.dlogits(r, c) = diff * inv_n;
        }
    }
    out.loss *= inv_n;
    return out;
}

namespace {

LossAndGrad evaluate_loss(const Tensor2& logits, const std::vector<std::size_t>& labels, CheckLoss kind) {
    return kind == CheckLoss::CrossEntropy ? mean_cross_entropy(logits, labels) : mean_quadratic(logits, labels);
}

double loss_only(const SparseModel& m, const Batch& b, CheckLoss kind) {
    return evaluate_loss(forward(m, b.inputs).logits, b.labels, kind).loss;
}

} // namespace

double grad_check(const SparseModel& model, const Batch& batch, double h, CheckLoss kind) {
    if (batch.size() == 0) return 0.0;
    auto fwd = forward(model, batch.inputs);
    auto lg = evaluate_loss(fwd.logits, batch.labels, kind);
    Gradients g = backward(model, fwd.cache, lg.dlogits);

    SparseModel probe = model;
    double worst = 0.0;
    auto compare = [&](double analytic, double& param) {
        const double saved = param;
        param = saved + h;
        const double up = loss_only(probe, batch, kind);
        param = saved - h;
        const double down = loss_only(probe, batch, kind);
        param = saved;
        const double fd = (up - down) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - analytic) / std::max(1.0, std::abs(fd)));
    };
    for (std::size_t l = 0; l < probe.layer_count(); ++l) {
        SparseLayer& layer = probe.mutable_layer(l);
        for (std::size_t i = 0; i < layer.weight.data.size(); ++i)
            if (layer.mask[i]) compare(g.weight[l].data[i], layer.weight.data[i]);
        for (std::size_t o = 0; o < layer.bias.size(); ++o) compare(g.bias[l][o], layer.bias[o]);
    }
    return worst;
}

} // namespace swast
