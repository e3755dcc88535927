// SPDX-License-Identifier: Apache-2.0
#include "swast/ablation.hpp"

#include <algorithm>
#include <cmath>

#include "swast/errors.hpp"

namespace swast {

std::vector<AblationCell> ablation_cells() {
    return {
        {"standard", false, false, false},
        {"prune_only", true, false, false},
        {"coreset_only", false, true, false},
        {"coreset_only_sp", false, true, true},
        {"prune_coreset", true, true, false},
        {"prune_coreset_sp", true, true, true},
    };
}

TrainConfig apply_cell(TrainConfig base, const AblationCell& cell) {
    base.use_pruning = cell.prune;
    base.use_coreset = cell.coreset;
    base.use_sp = cell.sp;
    return base;
}

std::size_t count_collapses(const std::vector<EpochMetrics>& metrics, bool pruning_active, double threshold) {
    if (!pruning_active) return 0;
    std::size_t n = 0;
    for (std::size_t i = 1; i < metrics.size(); ++i) {
        if (!metrics[i].selection_event) continue;
        double low = metrics[i].test_accuracy;
        if (i + 1 < metrics.size()) low = std::min(low, metrics[i + 1].test_accuracy);
        if (metrics[i - 1].test_accuracy - low > threshold) ++n;
    }
    return n;
}

bool AblationTable::operator==(const AblationTable& o) const {
    auto run_eq = [](const AblationRun& a, const AblationRun& b) {
        return a.cell == b.cell && a.seed == b.seed && a.final_accuracy == b.final_accuracy &&
               a.final_noise_fraction == b.final_noise_fraction && a.collapses == b.collapses && a.diverged == b.diverged;
    };
    auto sum_eq = [](const AblationSummary& a, const AblationSummary& b) {
        return a.cell == b.cell && a.mean_accuracy == b.mean_accuracy && a.std_accuracy == b.std_accuracy &&
               a.mean_noise_fraction == b.mean_noise_fraction && a.collapses == b.collapses;
    };
    return std::equal(runs.begin(), runs.end(), o.runs.begin(), o.runs.end(), run_eq) &&
           std::equal(summary.begin(), summary.end(), o.summary.begin(), o.summary.end(), sum_eq);
}

AblationTable ablation_matrix(const Dataset& train, const Dataset& test, const TrainConfig& base,
                              const std::vector<std::uint64_t>& seeds) {
    if (seeds.size() < 2) throw ConfigError("ablation_matrix: at least two seeds required");
    AblationTable table;
    const auto cells = ablation_cells();
    for (auto seed : seeds) {
        for (const auto& cell : cells) {
            TrainConfig cfg = apply_cell(base, cell);
            cfg.seed = seed;
            RunResult r = run_swast(cfg, train, test);
            AblationRun run;
            run.cell = cell.name;
            run.seed = seed;
            run.diverged = r.diverged;
            if (!r.metrics.empty()) {
                run.final_accuracy = r.metrics.back().test_accuracy;
                run.final_noise_fraction = r.metrics.back().coreset_noise_fraction;
            }
            run.collapses = count_collapses(r.metrics, cfg.use_pruning);
            table.runs.push_back(run);
        }
    }
    for (const auto& cell : cells) {
        AblationSummary s;
        s.cell = cell.name;
        std::vector<double> acc;
        double noise = 0.0;
        std::size_t noise_n = 0;
        for (const auto& r : table.runs) {
            if (r.cell != cell.name) continue;
            acc.push_back(r.final_accuracy);
            s.collapses += r.collapses;
            if (r.final_noise_fraction) {
                noise += *r.final_noise_fraction;
                ++noise_n;
            }
        }
        double mean = 0.0;
        for (double a : acc) mean += a;
        mean /= static_cast<double>(acc.size());
        double var = 0.0;
        for (double a : acc) var += (a - mean) * (a - mean);
        s.mean_accuracy = mean;
        s.std_accuracy = acc.size() > 1 ? std::sqrt(var / static_cast<double>(acc.size() - 1)) : 0.0;
        if (noise_n) s.mean_noise_fraction = noise / static_cast<double>(noise_n);
        table.summary.push_back(s);
    }
    return table;
}

} // namespace swast
