// SPDX-License-Identifier: Apache-2.0
#include "swast/sparsity.hpp"

#include <algorithm>
#include <cmath>

#include "swast/errors.hpp"

namespace swast {

namespace {

void check_rate(double r, const char* what) {
    if (!(r >= 0.0 && r < 1.0)) throw ConfigError(std::string(what) + " must lie in [0, 1)");
}

double erk_score(const LayerDims& d) {
    return static_cast<double>(d.in + d.out + d.kernel_w + d.kernel_h) / static_cast<double>(d.params());
}

} // namespace

double erk_raw_sparsity(const LayerDims& d) {
    if (d.params() == 0) throw InvalidInput("erk_raw_sparsity: zero-sized layer");
    return 1.0 - erk_score(d);
}

std::vector<double> layer_densities(const SparsityPlan& plan, const std::vector<LayerDims>& dims) {
    check_rate(plan.target_rate, "target_rate");
    for (const auto& d : dims)
        if (d.params() == 0) throw ConfigError("layer_densities: zero-sized layer");

    std::vector<double> density(dims.size(), 1.0);
    if (dims.empty() || plan.target_rate == 0.0) return density;

    if (plan.distribution == Distribution::Uniform) {
        for (std::size_t l = 1; l < dims.size(); ++l) density[l] = 1.0 - plan.target_rate;
        return density;
    }

    // ERK: density_l = eps * score_l over the non-dense layers, with eps set so
    // that the kept parameter count matches (1 - S) * N. Layers whose density
    // would exceed 1 are made dense and eps is recomputed.
    const double S = plan.target_rate;
    std::vector<bool> dense(dims.size(), false);
    for (;;) {
        double rhs = 0.0, divisor = 0.0;
        bool any_sparse = false;
        for (std::size_t l = 0; l < dims.size(); ++l) {
            const double n = static_cast<double>(dims[l].params());
            if (dense[l]) {
                rhs -= n * S;
            } else {
                any_sparse = true;
                rhs += n * (1.0 - S);
                divisor += erk_score(dims[l]) * n;
            }
        }
        if (!any_sparse || rhs <= 0.0 || divisor <= 0.0)
            throw ConfigError("layer_densities: ERK rescale infeasible for target_rate " + std::to_string(S));
        const double eps = rhs / divisor;
        bool changed = false;
        double max_score = 0.0;
        for (std::size_t l = 0; l < dims.size(); ++l)
            if (!dense[l]) max_score = std::max(max_score, erk_score(dims[l]));
        if (eps * max_score > 1.0) {
            for (std::size_t l = 0; l < dims.size(); ++l)
                if (!dense[l] && erk_score(dims[l]) == max_score) {
                    dense[l] = true;
                    changed = true;
                }
        }
        if (!changed) {
            for (std::size_t l = 0; l < dims.size(); ++l)
                density[l] = dense[l] ? 1.0 : eps * erk_score(dims[l]);
            return density;
        }
    }
}

std::vector<double> model_densities(const SparsityPlan& plan, const SparseModel& model) {
    check_rate(plan.target_rate, "target_rate");
    check_rate(plan.fc_fixed_rate, "fc_fixed_rate");
    const std::size_t L = model.layer_count();
    std::vector<double> density(L, 1.0);
    if (L == 0) return density;
    if (plan.scope == PruneScope::FcOnly) {
        density[L - 1] = 1.0 - plan.target_rate;
        return density;
    }
    std::vector<LayerDims> backbone;
    for (std::size_t l = 0; l + 1 < L; ++l) backbone.push_back({model.layer(l).in(), model.layer(l).out()});
    auto bd = layer_densities(plan, backbone);
    std::copy(bd.begin(), bd.end(), density.begin());
    density[L - 1] = 1.0 - plan.fc_fixed_rate;
    return density;
}

std::size_t active_target(double density, std::size_t size) {
    if (size == 0) return 0;
    const double raw = std::floor(density * static_cast<double>(size) + 0.5);
    const auto k = static_cast<std::size_t>(std::max(raw, 1.0));
    return std::min(k, size);
}

void init_masks(SparseModel& model, const std::vector<double>& densities, Rng& rng) {
    if (densities.size() != model.layer_count()) throw InvalidInput("init_masks: one density per layer required");
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        if (!(densities[l] > 0.0 && densities[l] <= 1.0)) throw InvalidInput("init_masks: density must lie in (0, 1]");
        SparseLayer& layer = model.mutable_layer(l);
        const std::size_t size = layer.mask.size();
        const std::size_t k = active_target(densities[l], size);
        std::fill(layer.mask.begin(), layer.mask.end(), std::uint8_t{0});
        if (k == size) {
            std::fill(layer.mask.begin(), layer.mask.end(), std::uint8_t{1});
        } else {
            for (std::size_t idx : rng.sample_without_replacement(size, k)) layer.mask[idx] = 1;
        }
        layer.enforce_mask();
    }
}

SparsityReport actual_sparsity(const SparseModel& model) {
    auto scoped = apply_scope(model);
    std::size_t total = 0, active = 0, s_total = 0, s_active = 0;
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        const auto& layer = model.layer(l);
        const std::size_t n = layer.mask.size(), a = layer.active_count();
        total += n;
        active += a;
        if (std::find(scoped.begin(), scoped.end(), l) != scoped.end()) {
            s_total += n;
            s_active += a;
        }
    }
    SparsityReport r;
    if (total) r.whole = 1.0 - static_cast<double>(active) / static_cast<double>(total);
    if (s_total) r.scoped = 1.0 - static_cast<double>(s_active) / static_cast<double>(s_total);
    return r;
}

std::vector<std::size_t> apply_scope(std::size_t layer_count, PruneScope scope) {
    if (layer_count == 0) return {};
    if (scope == PruneScope::FcOnly) return {layer_count - 1};
    std::vector<std::size_t> all(layer_count);
    for (std::size_t l = 0; l < layer_count; ++l) all[l] = l;
    return all;
}

} // namespace swast
