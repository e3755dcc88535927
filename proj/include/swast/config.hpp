// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "swast/dataset.hpp"
#include "swast/engine.hpp"

namespace swast {

enum class DataSource { Blobs, TwoMoons, Idx };

struct DataConfig {
    DataSource source = DataSource::Blobs;
    std::size_t n = 2000;
    std::size_t n_test = 1000;
    std::size_t dim = 2;
    std::size_t classes = 2;
    double cluster_std = 1.0;
    double center_box = 10.0;
    double moon_noise = 0.1;
    double label_noise = 0.0;
    bool standardize = true; // z-score features with training statistics
    std::string images, labels, test_images, test_labels;
    std::size_t limit = 1000;
    std::size_t test_limit = 1000;
};

struct ExperimentConfig {
    TrainConfig train;
    DataConfig data;
};

/// Parses the YAML experiment schema (see README). Unknown keys and
/// malformed values throw ConfigError naming the offending key.
ExperimentConfig parse_config(const std::string& text);

/// Reads and parses `path`; a missing file is a ConfigError naming it.
/// SWAST_SEED, when set, overrides the seed.
ExperimentConfig load_config(const std::string& path);

/// Train/test sets described by the data section, seeded from train.seed.
std::pair<Dataset, Dataset> build_datasets(const ExperimentConfig& cfg);

} // namespace swast
