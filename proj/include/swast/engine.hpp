// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "swast/coreset.hpp"
#include "swast/dataset.hpp"
#include "swast/events.hpp"
#include "swast/model.hpp"
#include "swast/optimizer.hpp"
#include "swast/preservation.hpp"
#include "swast/pruning.hpp"
#include "swast/rng.hpp"

namespace swast {

enum class Variant { Trim, Cut };
enum class SelectorKind { EL2N, Moderate, GradMatchOMP };

struct TrainConfig {
    std::vector<std::size_t> hidden = {64, 64};
    std::size_t total_epochs = 60;
    std::optional<std::size_t> warmup_epochs; // unset: default_warmup(T, alpha)
    std::size_t selection_interval = 20;
    double coreset_ratio = 0.1;
    double sp_weight = 0.1;
    bool use_sp = true;
    bool use_coreset = true;
    bool use_pruning = true;
    Variant variant = Variant::Cut;
    SelectorKind selector = SelectorKind::EL2N;
    OmpOptions omp;
    RigLConfig rigl;
    OptimizerConfig optimizer;
    std::size_t batch_size = 128;
    std::uint64_t seed = 0;

    /// Throws ConfigError on violated invariants.
    void validate() const;
};

/// ceil(T * alpha / 2), clamped to at least 1.
std::size_t default_warmup(std::size_t total_epochs, double alpha);

std::size_t resolved_warmup(const TrainConfig& cfg);

/// Sparsity plan with scope taken from the variant (Trim: FcOnly, Cut: FullNetwork).
SparsityPlan effective_plan(const TrainConfig& cfg);

/// Optimizer steps of the whole run, assuming full data during warm-up and
/// ceil(alpha N)-sized coresets afterwards.
std::size_t planned_total_steps(const TrainConfig& cfg, std::size_t n_train);

/// RigL config with t_end resolved (75% of planned steps when unset).
RigLConfig resolved_rigl(const TrainConfig& cfg, std::size_t n_train);

/// Epochs t in 1..T with t > K and t mod R == 0 (empty when coresets are off).
std::vector<std::size_t> selection_epochs(const TrainConfig& cfg);

struct EpochMetrics {
    std::size_t epoch = 0;
    double ce_loss = 0.0;
    double sp_loss = 0.0;
    double total_loss = 0.0;
    double test_accuracy = 0.0; // fraction in [0, 1]
    double scoped_sparsity = 0.0;
    std::size_t coreset_size = 0;
    std::optional<double> coreset_noise_fraction;
    bool selection_event = false;

    bool operator==(const EpochMetrics&) const = default;
};

// Everything that evolves during a run; this is what a checkpoint stores.
struct TrainingState {
    SparseModel model;
    SgdState optimizer;
    CoresetState coreset;
    std::optional<PreservedState> preserved;
    Rng rng;
    std::uint64_t epoch = 0; // completed epochs
    std::uint64_t step = 0;  // optimizer steps taken

    bool operator==(const TrainingState&) const = default;
};

/// Fresh state: seeded model, masks at the plan's densities, full-data coreset.
TrainingState initial_state(const TrainConfig& cfg, const Dataset& train);

double evaluate_accuracy(const SparseModel& model, const Dataset& data);

/// Runs the selector configured in cfg on the whole training set.
CoresetState run_selector(const TrainConfig& cfg, const SparseModel& model, const Dataset& train,
                          std::size_t epoch, EventLog* events);

struct EpochOutcome {
    EpochMetrics metrics;
    bool diverged = false;
};

/// One epoch over shuffled mini-batches of the current coreset: composite
/// loss, backward, RigL update when due, masked SGD step.
EpochOutcome train_epoch(TrainingState& state, const Dataset& train, const Dataset* test,
                         const TrainConfig& cfg, const RigLConfig& rigl, std::size_t epoch,
                         EventLog* events);

struct RunOptions {
    std::optional<TrainingState> resume;
    std::optional<std::size_t> stop_after_epoch;
};

struct RunResult {
    TrainingState final_state;
    std::vector<EpochMetrics> metrics;
    EventLog events;
    bool diverged = false;
};

/// The alternating warm-up / select / record / train loop.
RunResult run_swast(const TrainConfig& cfg, const Dataset& train, const Dataset& test,
                    const RunOptions& options = {});

} // namespace swast
