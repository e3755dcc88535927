// SPDX-License-Identifier: Apache-2.0
#include "swast/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "swast/errors.hpp"

namespace swast {

namespace {

// Walks one YAML mapping, rejecting keys that no reader asked for.
class Section {
public:
    Section(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
        if (node_ && !node_.IsNull() && !node_.IsMap()) throw ConfigError(path_ + ": expected a mapping");
    }

    ~Section() noexcept(false) {
        if (std::uncaught_exceptions() || !node_ || !node_.IsMap()) return;
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!seen_.count(key)) throw ConfigError("unknown key '" + qualified(key) + "'");
        }
    }

    Section child(const std::string& key) {
        seen_.insert(key);
        return Section(node_ && node_.IsMap() ? node_[key] : YAML::Node(), qualified(key));
    }

    template <class T>
    void get(const std::string& key, T& out) {
        seen_.insert(key);
        if (!node_ || !node_.IsMap()) return;
        const YAML::Node v = node_[key];
        if (!v) return;
        try {
            out = v.as<T>();
        } catch (const YAML::Exception&) {
            throw ConfigError("bad value for '" + qualified(key) + "'");
        }
    }

    void get_size(const std::string& key, std::size_t& out) {
        long long v = static_cast<long long>(out);
        get(key, v);
        if (v < 0) throw ConfigError("'" + qualified(key) + "' must be non-negative");
        out = static_cast<std::size_t>(v);
    }

    // Value that may be the string "auto" (unset) or a non-negative integer.
    void get_auto(const std::string& key, std::optional<std::size_t>& out) {
        seen_.insert(key);
        if (!node_ || !node_.IsMap() || !node_[key]) return;
        const YAML::Node v = node_[key];
        if (v.IsScalar() && v.Scalar() == "auto") {
            out.reset();
            return;
        }
        std::size_t n = 0;
        get_size(key, n);
        out = n;
    }

    std::string enum_value(const std::string& key, const std::string& fallback, std::set<std::string> allowed) {
        std::string v = fallback;
        get(key, v);
        if (!allowed.count(v)) throw ConfigError("bad value '" + v + "' for '" + qualified(key) + "'");
        return v;
    }

private:
    std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const YAML::Node node_;
    std::string path_;
    std::set<std::string> seen_;
};

} // namespace

ExperimentConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    ExperimentConfig cfg;
    TrainConfig& t = cfg.train;
    DataConfig& d = cfg.data;
    {
        Section top(root, "");
        top.get("seed", t.seed);
        {
            Section s = top.child("data");
            const auto kind = s.enum_value("kind", "blobs", {"blobs", "moons", "idx"});
            d.source = kind == "blobs" ? DataSource::Blobs : kind == "moons" ? DataSource::TwoMoons : DataSource::Idx;
            s.get_size("n", d.n);
            s.get_size("n_test", d.n_test);
            s.get_size("dim", d.dim);
            s.get_size("classes", d.classes);
            s.get("cluster_std", d.cluster_std);
            s.get("center_box", d.center_box);
            s.get("moon_noise", d.moon_noise);
            s.get("label_noise", d.label_noise);
            s.get("standardize", d.standardize);
            s.get("images", d.images);
            s.get("labels", d.labels);
            s.get("test_images", d.test_images);
            s.get("test_labels", d.test_labels);
            s.get_size("limit", d.limit);
            s.get_size("test_limit", d.test_limit);
        }
        {
            Section s = top.child("model");
            s.get("hidden", t.hidden);
        }
        {
            Section s = top.child("train");
            s.get_size("epochs", t.total_epochs);
            s.get_auto("warmup_epochs", t.warmup_epochs);
            s.get_size("selection_interval", t.selection_interval);
            s.get("coreset_ratio", t.coreset_ratio);
            s.get_size("batch_size", t.batch_size);
            s.get("use_coreset", t.use_coreset);
        }
        {
            Section s = top.child("selector");
            const auto kind = s.enum_value("kind", "el2n", {"el2n", "moderate", "gradmatch"});
            t.selector = kind == "el2n" ? SelectorKind::EL2N
                       : kind == "moderate" ? SelectorKind::Moderate
                                            : SelectorKind::GradMatchOMP;
            s.get("per_class", t.omp.per_class);
            s.get("l2_reg", t.omp.l2_reg);
            s.get("tol", t.omp.tol);
        }
        {
            Section s = top.child("preservation");
            s.get("enabled", t.use_sp);
            s.get("lambda", t.sp_weight);
        }
        {
            Section s = top.child("pruning");
            s.get("enabled", t.use_pruning);
            t.variant = s.enum_value("variant", "cut", {"cut", "trim"}) == "cut" ? Variant::Cut : Variant::Trim;
            s.get("target_rate", t.rigl.plan.target_rate);
            s.get("fc_fixed_rate", t.rigl.plan.fc_fixed_rate);
            t.rigl.plan.distribution =
                s.enum_value("distribution", "erk", {"erk", "uniform"}) == "erk" ? Distribution::ERK : Distribution::Uniform;
            s.get_size("delta_t", t.rigl.delta_t);
            std::optional<std::size_t> t_end;
            s.get_auto("t_end", t_end);
            t.rigl.t_end = t_end.value_or(0);
            s.get("drop_fraction", t.rigl.drop_fraction);
        }
        {
            Section s = top.child("optimizer");
            s.get("lr", t.optimizer.lr);
            s.get("momentum", t.optimizer.momentum);
            s.get("weight_decay", t.optimizer.weight_decay);
            s.get("nesterov", t.optimizer.nesterov);
            s.get("cosine", t.optimizer.cosine);
        }
    }
    if (d.n == 0) throw ConfigError("data.n must be >= 1");
    if (!(d.label_noise >= 0.0 && d.label_noise <= 1.0)) throw ConfigError("data.label_noise must lie in [0, 1]");
    if (d.source == DataSource::Idx && (d.images.empty() || d.labels.empty()))
        throw ConfigError("data.kind idx requires data.images and data.labels");
    t.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    ExperimentConfig cfg;
    try {
        cfg = parse_config(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
    if (const char* env = std::getenv("SWAST_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (!*env || *end) throw ConfigError(std::string("SWAST_SEED is not an unsigned integer: '") + env + "'");
        cfg.train.seed = v;
    }
    return cfg;
}

std::pair<Dataset, Dataset> build_datasets(const ExperimentConfig& cfg) {
    const DataConfig& d = cfg.data;
    Rng rng(mix_seed(cfg.train.seed, 0xda7a));
    std::pair<Dataset, Dataset> out;
    if (d.source == DataSource::Idx) {
        out.first = load_idx_subset(d.images, d.labels, d.limit);
        if (!d.test_images.empty()) {
            if (d.test_labels.empty()) throw ConfigError("data.test_images requires data.test_labels");
            out.second = load_idx_subset(d.test_images, d.test_labels, d.test_limit);
        } else {
            out.second = out.first;
        }
        const auto classes = std::max(out.first.class_count, out.second.class_count);
        out.first.class_count = out.second.class_count = classes;
    } else {
        SyntheticSpec spec;
        spec.kind = d.source == DataSource::Blobs ? SyntheticKind::Blobs : SyntheticKind::TwoMoons;
        spec.n = d.n;
        spec.dim = d.dim;
        spec.class_count = d.classes;
        spec.center_box = d.center_box;
        spec.cluster_std = d.cluster_std;
        spec.moon_noise = d.moon_noise;
        out = generate_synthetic_split(spec, d.n_test, rng);
    }
    if (d.standardize) standardize_features(out.first, out.second);
    if (d.label_noise > 0.0) out.first = inject_label_noise(std::move(out.first), d.label_noise, rng);
    return out;
}

} // namespace swast
