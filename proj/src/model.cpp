// SPDX-License-Identifier: Apache-2.0
#include "swast/model.hpp"

#include <algorithm>
#include <cmath>

#include "swast/errors.hpp"

namespace swast {

std::size_t SparseLayer::active_count() const {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

void SparseLayer::enforce_mask() {
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i] == 0) weight.data[i] = 0.0;
}

SparseModel::SparseModel(const std::vector<std::size_t>& widths, Rng& rng, PruneScope scope)
    : scope_(scope) {
    if (widths.size() < 2) throw InvalidInput("SparseModel: need at least input and output widths");
    for (std::size_t w : widths)
        if (w == 0) throw InvalidInput("SparseModel: zero layer width");
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        SparseLayer layer;
        const std::size_t in = widths[l], out = widths[l + 1];
        layer.weight = Tensor2(out, in);
        const double bound = std::sqrt(6.0 / static_cast<double>(in));
        for (double& w : layer.weight.data) w = rng.uniform(-bound, bound);
        layer.bias.assign(out, 0.0);
        layer.mask.assign(out * in, 1);
        layers_.push_back(std::move(layer));
    }
}

SparseModel::SparseModel(std::vector<SparseLayer> layers, PruneScope scope)
    : layers_(std::move(layers)), scope_(scope) {
    if (layers_.empty()) throw InvalidInput("SparseModel: no layers");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& L = layers_[l];
        if (L.weight.data.size() != L.out() * L.in() || L.bias.size() != L.out() ||
            L.mask.size() != L.weight.data.size())
            throw InvalidInput("SparseModel: inconsistent shapes in layer " + std::to_string(l));
        if (l > 0 && layers_[l - 1].out() != L.in())
            throw InvalidInput("SparseModel: layer widths do not chain at layer " + std::to_string(l));
        for (auto m : L.mask)
            if (m > 1) throw InvalidInput("SparseModel: mask entries must be 0 or 1");
    }
}

std::size_t SparseModel::input_width() const { return layers_.empty() ? 0 : layers_.front().in(); }
std::size_t SparseModel::output_width() const { return layers_.empty() ? 0 : layers_.back().out(); }

void SparseModel::enforce_masks() {
    ++revision_;
    for (auto& l : layers_) l.enforce_mask();
}

bool SparseModel::masks_respected() const {
    for (const auto& l : layers_)
        for (std::size_t i = 0; i < l.mask.size(); ++i)
            if (l.mask[i] == 0 && l.weight.data[i] != 0.0) return false;
    return true;
}

std::size_t SparseModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
    return n;
}

} // namespace swast
