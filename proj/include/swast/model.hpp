// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "swast/rng.hpp"
#include "swast/tensor.hpp"

namespace swast {

enum class PruneScope : std::uint8_t { FcOnly = 0, FullNetwork = 1 };

// One masked fully-connected layer: y = (W o M) x + b.
struct SparseLayer {
    Tensor2 weight;                 // out x in
    std::vector<double> bias;       // out
    std::vector<std::uint8_t> mask; // out x in, entries 0/1

    std::size_t in() const { return weight.cols; }
    std::size_t out() const { return weight.rows; }
    std::size_t active_count() const;

    /// Zeroes every weight whose mask entry is 0.
    void enforce_mask();

    bool operator==(const SparseLayer&) const = default;
};

// Masked multilayer perceptron. The final layer is the classifier ("FC"
// layer); everything before it is the backbone. Mutable access goes through
// mutable_layer(), which bumps revision() so stale forward caches can be
// detected.
class SparseModel {
public:
    SparseModel() = default;

    /// He-uniform weights scaled by fan-in, zero biases, all-ones masks.
    SparseModel(const std::vector<std::size_t>& widths, Rng& rng,
                PruneScope scope = PruneScope::FcOnly);

    /// Takes ownership of pre-built layers; validates that widths chain.
    SparseModel(std::vector<SparseLayer> layers, PruneScope scope);

    std::size_t layer_count() const { return layers_.size(); }
    const SparseLayer& layer(std::size_t i) const { return layers_.at(i); }
    SparseLayer& mutable_layer(std::size_t i) {
        ++revision_;
        return layers_.at(i);
    }
    const std::vector<SparseLayer>& layers() const { return layers_; }

    std::size_t input_width() const;
    std::size_t output_width() const;

    PruneScope prune_scope() const { return scope_; }
    void set_prune_scope(PruneScope s) { scope_ = s; }

    std::uint64_t revision() const { return revision_; }

    /// Applies enforce_mask() to every layer.
    void enforce_masks();

    /// True when W o (1 - M) is exactly zero in every layer.
    bool masks_respected() const;

    std::size_t parameter_count() const;

    // Revision is bookkeeping, not state.
    bool operator==(const SparseModel& o) const { return scope_ == o.scope_ && layers_ == o.layers_; }

private:
    std::vector<SparseLayer> layers_;
    PruneScope scope_ = PruneScope::FcOnly;
    std::uint64_t revision_ = 0;
};

} // namespace swast
