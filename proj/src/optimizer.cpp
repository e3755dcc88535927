// SPDX-License-Identifier: Apache-2.0
#include "swast/optimizer.hpp"

#include <cmath>
#include <numbers>

#include "swast/errors.hpp"

namespace swast {

SgdState SgdState::zeros_like(const SparseModel& model) {
    SgdState s;
    for (const auto& l : model.layers()) {
        s.weight_momentum.emplace_back(l.weight.size(), 0.0);
        s.bias_momentum.emplace_back(l.bias.size(), 0.0);
    }
    return s;
}

double epoch_learning_rate(const OptimizerConfig& cfg, std::size_t epoch, std::size_t total_epochs) {
    if (!cfg.cosine || total_epochs == 0) return cfg.lr;
    const double progress = static_cast<double>(epoch - 1) / static_cast<double>(total_epochs);
    return cfg.lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

namespace {

inline void update_one(double& param, double& buf, double grad, const OptimizerConfig& cfg, double lr) {
    const double g = grad + cfg.weight_decay * param;
    buf = cfg.momentum * buf + g;
    const double step = cfg.nesterov ? g + cfg.momentum * buf : buf;
    param -= lr * step;
}

} // namespace

void sgd_step(SparseModel& model, SgdState& state, const Gradients& grads, const OptimizerConfig& cfg, double lr) {
    if (grads.weight.size() != model.layer_count() || state.weight_momentum.size() != model.layer_count())
        throw InvalidInput("sgd_step: gradient/optimizer state does not match model");
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        SparseLayer& layer = model.mutable_layer(l);
        auto& wbuf = state.weight_momentum[l];
        auto& bbuf = state.bias_momentum[l];
        const auto& gw = grads.weight[l].data;
        for (std::size_t i = 0; i < layer.mask.size(); ++i) {
            if (!layer.mask[i]) {
                wbuf[i] = 0.0;
                layer.weight.data[i] = 0.0;
                continue;
            }
            update_one(layer.weight.data[i], wbuf[i], gw[i], cfg, lr);
        }
        for (std::size_t o = 0; o < layer.bias.size(); ++o) update_one(layer.bias[o], bbuf[o], grads.bias[l][o], cfg, lr);
    }
}

} // namespace swast
