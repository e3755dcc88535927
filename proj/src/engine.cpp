// SPDX-License-Identifier: Apache-2.0
#include "swast/engine.hpp"

#include <algorithm>
#include <cmath>

#include "swast/errors.hpp"
#include "swast/network.hpp"
#include "swast/numeric.hpp"
#include "swast/sparsity.hpp"

namespace swast {

void TrainConfig::validate() const {
    if (total_epochs == 0) throw ConfigError("total_epochs must be >= 1");
    if (!(coreset_ratio > 0.0 && coreset_ratio <= 1.0)) throw ConfigError("coreset_ratio must lie in (0, 1]");
    if (selection_interval == 0) throw ConfigError("selection_interval must be >= 1");
    if (!(sp_weight >= 0.0) || !std::isfinite(sp_weight)) throw ConfigError("sp_weight must be >= 0");
    if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
    if (warmup_epochs && *warmup_epochs > total_epochs) throw ConfigError("warmup_epochs exceeds total_epochs");
    for (auto h : hidden)
        if (h == 0) throw ConfigError("hidden widths must be positive");
    if (rigl.delta_t == 0) throw ConfigError("rigl.delta_t must be >= 1");
    if (rigl.t_end != 0 && rigl.t_end < rigl.delta_t) throw ConfigError("rigl.t_end must be >= delta_t");
    if (!(rigl.drop_fraction >= 0.0 && rigl.drop_fraction < 1.0)) throw ConfigError("rigl.drop_fraction must lie in [0, 1)");
    if (!(rigl.plan.target_rate >= 0.0 && rigl.plan.target_rate < 1.0)) throw ConfigError("target_rate must lie in [0, 1)");
    if (!(rigl.plan.fc_fixed_rate >= 0.0 && rigl.plan.fc_fixed_rate < 1.0))
        throw ConfigError("fc_fixed_rate must lie in [0, 1)");
    if (!(optimizer.lr > 0.0)) throw ConfigError("optimizer.lr must be positive");
    if (!(optimizer.momentum >= 0.0 && optimizer.momentum < 1.0)) throw ConfigError("optimizer.momentum must lie in [0, 1)");
    if (!(optimizer.weight_decay >= 0.0)) throw ConfigError("optimizer.weight_decay must be >= 0");
    if (!(omp.l2_reg >= 0.0) || !(omp.tol >= 0.0)) throw ConfigError("omp l2_reg and tol must be >= 0");
}

std::size_t default_warmup(std::size_t total_epochs, double alpha) {
    return std::max<std::size_t>(1, ceil_count(static_cast<double>(total_epochs) * alpha / 2.0));
}

std::size_t resolved_warmup(const TrainConfig& cfg) {
    return cfg.warmup_epochs ? std::max<std::size_t>(1, *cfg.warmup_epochs)
                             : default_warmup(cfg.total_epochs, cfg.coreset_ratio);
}

SparsityPlan effective_plan(const TrainConfig& cfg) {
    SparsityPlan p = cfg.rigl.plan;
    p.scope = cfg.variant == Variant::Trim ? PruneScope::FcOnly : PruneScope::FullNetwork;
    return p;
}

std::size_t planned_total_steps(const TrainConfig& cfg, std::size_t n_train) {
    const std::size_t T = cfg.total_epochs;
    const std::size_t K = cfg.use_coreset ? std::min(resolved_warmup(cfg), T) : T;
    const std::size_t full = (n_train + cfg.batch_size - 1) / cfg.batch_size;
    const std::size_t core_n = n_train == 0 ? 0 : std::min(n_train, ceil_count(cfg.coreset_ratio * static_cast<double>(n_train)));
    const std::size_t core = (core_n + cfg.batch_size - 1) / cfg.batch_size;
    return K * full + (T - K) * core;
}

RigLConfig resolved_rigl(const TrainConfig& cfg, std::size_t n_train) {
    RigLConfig r = cfg.rigl;
    r.plan = effective_plan(cfg);
    if (r.t_end == 0) {
        const auto planned = static_cast<double>(planned_total_steps(cfg, n_train));
        r.t_end = std::max(r.delta_t, static_cast<std::size_t>(std::floor(0.75 * planned)));
    }
    return r;
}

std::vector<std::size_t> selection_epochs(const TrainConfig& cfg) {
    std::vector<std::size_t> out;
    if (!cfg.use_coreset) return out;
    const std::size_t K = resolved_warmup(cfg);
    for (std::size_t t = 1; t <= cfg.total_epochs; ++t)
        if (t > K && t % cfg.selection_interval == 0) out.push_back(t);
    return out;
}

// ---------------------------------------------------------------------------

TrainingState initial_state(const TrainConfig& cfg, const Dataset& train) {
    cfg.validate();
    TrainingState s;
    s.rng = Rng(cfg.seed);
    std::vector<std::size_t> widths{train.dim()};
    widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
    widths.push_back(train.class_count);
    const SparsityPlan plan = effective_plan(cfg);
    s.model = SparseModel(widths, s.rng, plan.scope);
    if (cfg.use_pruning) init_masks(s.model, model_densities(plan, s.model), s.rng);
    s.optimizer = SgdState::zeros_like(s.model);
    s.coreset = CoresetState::full(train.size());
    return s;
}

double evaluate_accuracy(const SparseModel& model, const Dataset& data) {
    if (data.size() == 0) return 0.0;
    auto logits = forward(model, data.features).logits;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto row = logits.row(i);
        const auto pred = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
        if (pred == data.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

CoresetState run_selector(const TrainConfig& cfg, const SparseModel& model, const Dataset& train, std::size_t epoch,
                          EventLog* events) {
    switch (cfg.selector) {
    case SelectorKind::EL2N:
        return el2n_select(el2n_score(model, train), cfg.coreset_ratio, epoch, cfg.total_epochs);
    case SelectorKind::Moderate:
        return moderate_select(model, train, cfg.coreset_ratio);
    case SelectorKind::GradMatchOMP:
        return gradmatch_select(model, train, cfg.coreset_ratio, cfg.omp, events);
    }
    throw ConfigError("unknown selector");
}

EpochOutcome train_epoch(TrainingState& state, const Dataset& train, const Dataset* test, const TrainConfig& cfg,
                         const RigLConfig& rigl, std::size_t epoch, EventLog* events) {
    EpochOutcome out;
    auto& m = out.metrics;
    m.epoch = epoch;

    const double lr = epoch_learning_rate(cfg.optimizer, epoch, cfg.total_epochs);
    const PreservedState* preserved = cfg.use_sp && state.preserved ? &*state.preserved : nullptr;
    const auto prunable = apply_scope(state.model);

    std::vector<std::size_t> order = state.coreset.indices;
    state.rng.shuffle(std::span<std::size_t>(order));

    double ce_sum = 0.0, sp_sum = 0.0, total_sum = 0.0;
    std::size_t seen = 0, missing = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
        const std::size_t end = std::min(order.size(), start + cfg.batch_size);
        const std::vector<std::size_t> ids(order.begin() + static_cast<std::ptrdiff_t>(start),
                                           order.begin() + static_cast<std::ptrdiff_t>(end));
        const Batch batch = train.batch(ids);
        auto fwd = forward(state.model, batch.inputs);
        if (!fwd.logits.all_finite()) {
            out.diverged = true;
            break;
        }
        auto loss = composite_loss_from_logits(fwd.logits, batch, preserved, cfg.sp_weight);
        if (!std::isfinite(loss.total)) {
            out.diverged = true;
            break;
        }
        const Gradients grads = backward(state.model, fwd.cache, loss.dlogits);
        ++state.step;
        if (cfg.use_pruning && rigl_due(state.step, rigl))
            rigl_update(state.model, grads, state.step, rigl, prunable, events);
        sgd_step(state.model, state.optimizer, grads, cfg.optimizer, lr);

        const auto b = static_cast<double>(ids.size());
        ce_sum += loss.ce * b;
        sp_sum += loss.sp * b;
        total_sum += loss.total * b;
        seen += ids.size();
        missing += loss.missing;
    }
    if (out.diverged && events)
        events->push_back({"divergence", "non-finite loss in epoch " + std::to_string(epoch)});
    if (missing && events)
        events->push_back({"sp_missing", std::to_string(missing) + " batch samples without preserved logits in epoch " +
                                             std::to_string(epoch)});

    if (seen) {
        const auto n = static_cast<double>(seen);
        m.ce_loss = ce_sum / n;
        m.sp_loss = sp_sum / n;
        m.total_loss = total_sum / n;
    }
    if (out.diverged) {
        m.ce_loss = m.sp_loss = m.total_loss = std::nan("");
    }
    if (test) m.test_accuracy = evaluate_accuracy(state.model, *test);
    m.scoped_sparsity = actual_sparsity(state.model).scoped;
    m.coreset_size = state.coreset.size();
    if (train.noise_flags) m.coreset_noise_fraction = noise_fraction(state.coreset, *train.noise_flags);
    return out;
}

RunResult run_swast(const TrainConfig& cfg, const Dataset& train, const Dataset& test, const RunOptions& options) {
    cfg.validate();
    train.validate();
    const std::size_t K = resolved_warmup(cfg);
    const RigLConfig rigl = resolved_rigl(cfg, train.size());

    RunResult result;
    TrainingState state = options.resume ? *options.resume : initial_state(cfg, train);

    for (std::size_t t = static_cast<std::size_t>(state.epoch) + 1; t <= cfg.total_epochs; ++t) {
        bool selected = false;
        if (cfg.use_coreset && t > K && t % cfg.selection_interval == 0) {
            selected = true;
            CoresetState next = run_selector(cfg, state.model, train, t, &result.events);
            if (next.indices.empty()) {
                result.events.push_back({"empty_selection", "epoch " + std::to_string(t) + ": keeping previous coreset"});
            } else {
                state.coreset = std::move(next);
            }
            if (cfg.use_sp) state.preserved = record_state(state.model, state.coreset, train);
        }
        auto outcome = train_epoch(state, train, &test, cfg, rigl, t, &result.events);
        outcome.metrics.selection_event = selected;
        result.metrics.push_back(outcome.metrics);
        state.epoch = t;
        if (outcome.diverged) {
            result.diverged = true;
            break;
        }
        if (options.stop_after_epoch && t == *options.stop_after_epoch) break;
    }
    result.final_state = std::move(state);
    return result;
}

} // namespace swast
