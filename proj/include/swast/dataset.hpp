// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "swast/rng.hpp"
#include "swast/tensor.hpp"

namespace swast {

struct Dataset {
    Tensor2 features; // N x d
    std::vector<std::size_t> labels;
    std::optional<std::vector<bool>> noise_flags;
    std::size_t class_count = 0;
    std::string name;

    std::size_t size() const { return features.rows; }
    std::size_t dim() const { return features.cols; }

    /// Rows `ids` gathered into a batch; sample_ids keeps the global indices.
    Batch batch(const std::vector<std::size_t>& ids) const;
    Batch all() const;

    /// Throws InvalidInput if labels or flags are inconsistent.
    void validate() const;

    bool operator==(const Dataset&) const = default;
};

enum class SyntheticKind { Blobs, TwoMoons };

struct SyntheticSpec {
    SyntheticKind kind = SyntheticKind::Blobs;
    std::size_t n = 1000;
    std::size_t dim = 2;         // blobs only
    std::size_t class_count = 2; // moons: always 2
    double center_box = 10.0;    // blob centers ~ U[-box, box]^dim
    double cluster_std = 1.0;
    double moon_noise = 0.1;
};

/// Balanced classes (label = i mod C). Deterministic in rng.
Dataset generate_synthetic(const SyntheticSpec& spec, Rng& rng);

/// Train and test sets drawn from the same distribution (same blob centers).
std::pair<Dataset, Dataset> generate_synthetic_split(const SyntheticSpec& spec, std::size_t n_test,
                                                     Rng& rng);

/// Z-scores every feature column of both sets with the training set's mean
/// and standard deviation (columns with zero spread are only centered).
void standardize_features(Dataset& train, Dataset& test);

/// First `limit` samples of an IDX image/label pair, pixels scaled to [0, 1].
/// Throws FormatError (with byte offset) on bad magic, truncation, or sizes
/// that disagree with the file length.
Dataset load_idx_subset(const std::string& images_path, const std::string& labels_path,
                        std::size_t limit);

/// Relabels floor(rate * N) samples, chosen without replacement, to a
/// uniformly random different class, and flags exactly those samples.
/// Throws ConfigError if C < 2 or rate is outside [0, 1].
Dataset inject_label_noise(Dataset dataset, double rate, Rng& rng);

} // namespace swast
