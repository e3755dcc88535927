// SPDX-License-Identifier: Apache-2.0
#include "swast/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "swast/errors.hpp"

namespace swast {

double f_decay(double t, double alpha, double t_end) {
    if (t > t_end) return 0.0;
    if (t_end <= 0.0) return alpha;
    return alpha / 2.0 * (1.0 + std::cos(t * std::numbers::pi / t_end));
}

bool rigl_due(std::size_t t, const RigLConfig& cfg) {
    return cfg.delta_t > 0 && t > 0 && t % cfg.delta_t == 0 && t <= cfg.t_end;
}

RigLReport rigl_update(SparseModel& model, const Gradients& dense_grads, std::size_t t, const RigLConfig& cfg,
                       const std::vector<std::size_t>& layers, EventLog* events) {
    if (cfg.delta_t == 0) throw ConfigError("rigl_update: delta_t must be >= 1");
    if (dense_grads.weight.size() != model.layer_count())
        throw InvalidInput("rigl_update: gradients do not match model");

    RigLReport report;
    const double fraction = f_decay(static_cast<double>(t), cfg.drop_fraction, static_cast<double>(cfg.t_end));
    for (std::size_t l : layers) {
        if (l >= model.layer_count()) throw InvalidInput("rigl_update: layer index out of range");
        const SparseLayer& cur = model.layer(l);
        const auto& grad = dense_grads.weight[l].data;
        if (grad.size() != cur.mask.size()) throw InvalidInput("rigl_update: gradient shape mismatch");

        std::vector<std::size_t> active, inactive;
        for (std::size_t i = 0; i < cur.mask.size(); ++i) (cur.mask[i] ? active : inactive).push_back(i);

        RigLLayerUpdate u;
        u.layer = l;
        if (inactive.empty()) { // dense layer: nothing to rewire
            report.layers.push_back(u);
            continue;
        }
        u.requested =static_cast<std::size_t>(std::floor(fraction * static_cast<double>(active.size()) + 0.5));
        std::size_t k = u.requested;
        if (k > inactive.size()) {
            k = inactive.size();
            report.clamped = true;
            if (events)
                events->push_back({"rigl_clamp", "layer " + std::to_string(l) + " step " + std::to_string(t) +
                                                     ": requested " + std::to_string(u.requested) + ", pool " +
                                                     std::to_string(inactive.size())});
        }
        k = std::min(k, active.size());
        u.moved = k;
        report.layers.push_back(u);
        if (k == 0) continue;

        // Smallest |W| first; lower index wins ties.
        std::stable_sort(active.begin(), active.end(), [&](std::size_t a, std::size_t b) {
            return std::abs(cur.weight.data[a]) < std::abs(cur.weight.data[b]);
        });
        // Largest |grad| first among positions that were inactive before this update.
        std::stable_sort(inactive.begin(), inactive.end(), [&](std::size_t a, std::size_t b) {
            return std::abs(grad[a]) > std::abs(grad[b]);
        });

        SparseLayer& layer = model.mutable_layer(l);
        for (std::size_t j = 0; j < k; ++j) {
            layer.mask[active[j]] = 0;
            layer.weight.data[active[j]] = 0.0;
        }
        for (std::size_t j = 0; j < k; ++j) {
            layer.mask[inactive[j]] = 1;
            layer.weight.data[inactive[j]] = 0.0;
        }
    }
    return report;
}

std::vector<double> magnitude_prune(std::vector<double> values, std::size_t k_zero) {
    if (k_zero > values.size()) throw InvalidInput("magnitude_prune: k_zero exceeds length");
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(values[a]) < std::abs(values[b]); });
    for (std::size_t j = 0; j < k_zero; ++j) values[order[j]] = 0.0;
    return values;
}

} // namespace swast
