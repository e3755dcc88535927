// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <vector>

#include "swast/dataset.hpp"
#include "swast/model.hpp"
#include "swast/rng.hpp"
#include "swast/tensor.hpp"

namespace swast::testing {

// Random MLP with random biases so no unit sits exactly on the ReLU kink.
inline SparseModel random_model(const std::vector<std::size_t>& widths, Rng& rng,
                                PruneScope scope = PruneScope::FcOnly) {
    SparseModel m(widths, rng, scope);
    for (std::size_t l = 0; l < m.layer_count(); ++l)
        for (double& b : m.mutable_layer(l).bias) b = rng.uniform(-0.5, 0.5);
    return m;
}

// Each entry kept with probability `density`, at least one per layer.
inline void random_masks(SparseModel& m, double density, Rng& rng) {
    for (std::size_t l = 0; l < m.layer_count(); ++l) {
        auto& layer = m.mutable_layer(l);
        for (auto& v : layer.mask) v = rng.uniform() < density ? 1 : 0;
        layer.mask[rng.index(layer.mask.size())] = 1;
        layer.enforce_mask();
    }
}

inline Batch random_batch(std::size_t n, std::size_t dim, std::size_t classes, Rng& rng) {
    Batch b;
    b.inputs = Tensor2(n, dim);
    for (auto& v : b.inputs.data) v = rng.normal();
    for (std::size_t i = 0; i < n; ++i) {
        b.labels.push_back(rng.index(classes));
        b.sample_ids.push_back(i);
    }
    return b;
}

inline Dataset random_dataset(std::size_t n, std::size_t dim, std::size_t classes, Rng& rng) {
    Dataset d;
    d.features = Tensor2(n, dim);
    for (auto& v : d.features.data) v = rng.normal();
    for (std::size_t i = 0; i < n; ++i) d.labels.push_back(i % classes);
    d.class_count = classes;
    return d;
}

// Straightforward dense reference forward pass: explicit (W o M) a + b.
inline Tensor2 reference_forward(const SparseModel& m, const Tensor2& x) {
    Tensor2 a = x;
    for (std::size_t l = 0; l < m.layer_count(); ++l) {
        const auto& L = m.layer(l);
        Tensor2 z(a.rows, L.out());
        for (std::size_t r = 0; r < a.rows; ++r)
            for (std::size_t o = 0; o < L.out(); ++o) {
                double s = L.bias[o];
                for (std::size_t i = 0; i < L.in(); ++i)
                    s += L.weight(o, i) * static_cast<double>(L.mask[o * L.in() + i]) * a(r, i);
                z(r, o) = (l + 1 < m.layer_count()) ? std::max(0.0, s) : s;
            }
        a = z;
    }
    return a;
}

inline double reference_mean_ce(const Tensor2& logits, const std::vector<std::size_t>& labels) {
    double total = 0.0;
    for (std::size_t r = 0; r < logits.rows; ++r) {
        double mx = logits(r, 0);
        for (std::size_t c = 1; c < logits.cols; ++c) mx = std::max(mx, logits(r, c));
        double s = 0.0;
        for (std::size_t c = 0; c < logits.cols; ++c) s += std::exp(logits(r, c) - mx);
        total += -(logits(r, labels[r]) - mx - std::log(s));
    }
    return total / static_cast<double>(logits.rows);
}

} // namespace swast::testing
