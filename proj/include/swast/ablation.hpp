// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "swast/dataset.hpp"
#include "swast/engine.hpp"

namespace swast {

struct AblationCell {
    std::string name;
    bool prune = false;
    bool coreset = false;
    bool sp = false;
};

/// The six meaningful cells of {prune} x {coreset} x {SP}; SP is only
/// meaningful when selections happen.
std::vector<AblationCell> ablation_cells();

TrainConfig apply_cell(TrainConfig base, const AblationCell& cell);

/// Test-accuracy drops of more than `threshold` (fraction) from the epoch
/// before a joint selection + pruning epoch to the lowest accuracy in that
/// epoch or the next.
std::size_t count_collapses(const std::vector<EpochMetrics>& metrics, bool pruning_active,
                            double threshold = 0.20);

struct AblationRun {
    std::string cell;
    std::uint64_t seed = 0;
    double final_accuracy = 0.0;
    std::optional<double> final_noise_fraction;
    std::size_t collapses = 0;
    bool diverged = false;
};

struct AblationSummary {
    std::string cell;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
    std::optional<double> mean_noise_fraction;
    std::size_t collapses = 0;
};

struct AblationTable {
    std::vector<AblationRun> runs;
    std::vector<AblationSummary> summary;

    bool operator==(const AblationTable& o) const;
};

/// Runs every cell for every seed. Throws ConfigError for fewer than two seeds.
AblationTable ablation_matrix(const Dataset& train, const Dataset& test, const TrainConfig& base,
                              const std::vector<std::uint64_t>& seeds);

} // namespace swast
