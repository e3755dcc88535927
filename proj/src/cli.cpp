// SPDX-License-Identifier: Apache-2.0
#include "swast/cli.hpp"

#include <filesystem>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "swast/ablation.hpp"
#include "swast/checkpoint.hpp"
#include "swast/config.hpp"
#include "swast/errors.hpp"
#include "swast/interplay.hpp"
#include "swast/metrics_csv.hpp"
#include "swast/network.hpp"
#include "swast/sparsity.hpp"

namespace swast {

namespace {

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
}

std::string join(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

std::string events_csv(const EventLog& events) {
    std::ostringstream os;
    os << "kind,detail\n";
    for (const auto& e : events) {
        std::string detail;
        for (char ch : e.detail) detail += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        os << e.kind << ",\"" << detail << "\"\n";
    }
    return os.str();
}

int cmd_train(const std::string& config_path, const std::string& out_dir, const std::string& resume,
              std::optional<std::size_t> stop_after, std::ostream& out) {
    const ExperimentConfig cfg = load_config(config_path);
    const auto [train, test] = build_datasets(cfg);
    RunOptions opts;
    if (!resume.empty()) opts.resume = load_checkpoint(resume).state;
    opts.stop_after_epoch = stop_after;
    ensure_dir(out_dir);

    RunResult r = run_swast(cfg.train, train, test, opts);
    emit_metrics(join(out_dir, "metrics.csv"), r.metrics);
    write_file_atomic(join(out_dir, "events.csv"), events_csv(r.events));
    save_checkpoint(join(out_dir, "final.ckpt"), Checkpoint{kCheckpointVersion, r.final_state});
    if (r.diverged) {
        out << "diverged at epoch " << r.final_state.epoch << "\n";
        return kExitDivergence;
    }
    if (!r.metrics.empty()) {
        const auto& m = r.metrics.back();
        out << "epoch " << m.epoch << " test_acc " << format_real(m.test_accuracy) << " sparsity "
            << format_real(m.scoped_sparsity) << " coreset " << m.coreset_size << "\n";
    }
    return kExitOk;
}

int cmd_interplay(const std::string& experiment, std::uint64_t seed, const std::string& out_dir, std::ostream& out) {
    ensure_dir(out_dir);
    Rng rng(seed);
    if (experiment == "runge") {
        const auto r = prune_experiment(PruneExperimentConfig{}, rng);
        write_file_atomic(join(out_dir, "runge_curves.csv"), curves_csv(r.curves));
        std::ostringstream s;
        s << "loss_noisyfit,loss_cleanfit,loss_pruned_noisyfit,loss_pruned_cleanfit\n"
          << format_real(r.loss_noisyfit) << ',' << format_real(r.loss_cleanfit) << ','
          << format_real(r.loss_pruned_noisyfit) << ',' << format_real(r.loss_pruned_cleanfit) << '\n';
        write_file_atomic(join(out_dir, "runge_summary.csv"), s.str());
        out << "pruned noisy-fit loss " << format_real(r.loss_pruned_noisyfit) << ", pruned clean-fit loss "
            << format_real(r.loss_pruned_cleanfit) << "\n";
    } else {
        EventLog events;
        IddSweepConfig cfg;
        cfg.idd.seed = seed;
        const auto rows = idd_sweep(cfg, rng, &events);
        write_file_atomic(join(out_dir, "idd_sweep.csv"), idd_csv(rows));
        out << rows.size() << " degrees written";
        if (has_event(events, "denominator_floor")) out << " (denominator floor activated)";
        out << "\n";
    }
    return kExitOk;
}

int cmd_ablate(const std::string& config_path, std::size_t seeds, const std::string& out_dir, std::ostream& out) {
    const ExperimentConfig cfg = load_config(config_path);
    if (seeds < 2) throw ConfigError("--seeds must be at least 2");
    const auto [train, test] = build_datasets(cfg);
    std::vector<std::uint64_t> seed_list;
    for (std::size_t i = 0; i < seeds; ++i) seed_list.push_back(cfg.train.seed + i);
    ensure_dir(out_dir);
    const AblationTable table = ablation_matrix(train, test, cfg.train, seed_list);
    write_file_atomic(join(out_dir, "ablation_runs.csv"), ablation_runs_csv(table));
    write_file_atomic(join(out_dir, "ablation_summary.csv"), ablation_summary_csv(table));
    for (const auto& s : table.summary)
        out << s.cell << ": mean acc " << format_real(s.mean_accuracy) << " collapses " << s.collapses << "\n";
    return kExitOk;
}

int cmd_gradcheck(std::uint64_t seed, std::ostream& out) {
    Rng rng(seed);
    SparseModel model({2, 64, 64, 3}, rng);
    init_masks(model, std::vector<double>{0.5, 0.5, 0.5}, rng);
    // Nonzero biases keep units with all inputs masked off the ReLU kink at 0.
    for (std::size_t l = 0; l < model.layer_count(); ++l)
        for (double& b : model.mutable_layer(l).bias) b = rng.uniform(-0.5, 0.5);
    Batch batch;
    batch.inputs = Tensor2(8, 2);
    for (auto& v : batch.inputs.data) v = rng.normal();
    for (std::size_t i = 0; i < 8; ++i) {
        batch.labels.push_back(rng.index(3));
        batch.sample_ids.push_back(i);
    }
    const double err = grad_check(model, batch, 1e-5);
    out << "max relative error " << format_real(err) << "\n";
    return err < 1e-6 ? kExitOk : kExitRuntime;
}

int cmd_inspect(const std::string& path, std::ostream& out) {
    const Checkpoint ck = load_checkpoint(path);
    const TrainingState& s = ck.state;
    out << "version " << ck.version << "\n"
        << "epoch " << s.epoch << " step " << s.step << "\n"
        << "scope " << (s.model.prune_scope() == PruneScope::FcOnly ? "fc" : "full") << "\n";
    for (std::size_t i = 0; i < s.model.layer_count(); ++i) {
        const auto& l = s.model.layer(i);
        out << "layer " << i << " " << l.in() << "x" << l.out() << " active " << l.active_count() << "/"
            << l.weight.size() << "\n";
    }
    const auto rep = actual_sparsity(s.model);
    out << "sparsity scoped " << format_real(rep.scoped) << " whole " << format_real(rep.whole) << "\n"
        << "coreset " << s.coreset.size() << " alpha " << format_real(s.coreset.alpha) << "\n"
        << "preserved " << (s.preserved ? s.preserved->size() : 0) << "\n";
    return kExitOk;
}

} // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Simultaneous weight and sample tailoring experiments", "swast"};
    app.require_subcommand(1);

    std::string config, out_dir = "out", resume, experiment, ckpt_path;
    std::size_t stop_after = 0, seeds = 5;
    std::uint64_t seed = 0;

    auto* train = app.add_subcommand("train", "Train with a YAML config");
    train->add_option("--config", config, "Config file")->required();
    train->add_option("--out", out_dir, "Output directory");
    train->add_option("--resume", resume, "Checkpoint to resume from");
    train->add_option("--stop-after", stop_after, "Stop after this epoch (writes a checkpoint)");

    auto* interplay = app.add_subcommand("interplay", "Polynomial interplay experiments");
    interplay->add_option("--experiment", experiment, "runge | idd")
        ->required()
        ->check(CLI::IsMember({"runge", "idd"}));
    interplay->add_option("--seed", seed, "Seed");
    interplay->add_option("--out", out_dir, "Output directory");

    auto* ablate = app.add_subcommand("ablate", "Prune x coreset x preservation ablation");
    ablate->add_option("--config", config, "Config file")->required();
    ablate->add_option("--seeds", seeds, "Number of seeds (consecutive from the config seed)");
    ablate->add_option("--out", out_dir, "Output directory");

    auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference audit of backpropagation");
    gradcheck->add_option("--seed", seed, "Seed");

    auto* inspect = app.add_subcommand("inspect", "Summarize a checkpoint");
    inspect->add_option("checkpoint", ckpt_path, "Checkpoint file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitConfig;
    }

    try {
        if (*train)
            return cmd_train(config, out_dir, resume,
                             stop_after ? std::optional<std::size_t>(stop_after) : std::nullopt, out);
        if (*interplay) return cmd_interplay(experiment, seed, out_dir, out);
        if (*ablate) return cmd_ablate(config, seeds, out_dir, out);
        if (*gradcheck) return cmd_gradcheck(seed, out);
        if (*inspect) return cmd_inspect(ckpt_path, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DivergenceError& e) {
        err << "diverged: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitConfig;
}

} // namespace swast
