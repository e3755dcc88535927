// SPDX-License-Identifier: Apache-2.0
#include "swast/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <set>

#include "swast/errors.hpp"

namespace swast {

Batch Dataset::batch(const std::vector<std::size_t>& ids) const {
    Batch b;
    b.inputs = Tensor2(ids.size(), dim());
    b.labels.reserve(ids.size());
    b.sample_ids = ids;
    for (std::size_t r = 0; r < ids.size(); ++r) {
        if (ids[r] >= size()) throw InvalidInput("Dataset::batch: sample id out of range");
        std::copy_n(features.row(ids[r]).begin(), dim(), b.inputs.row(r).begin());
        b.labels.push_back(labels[ids[r]]);
    }
    return b;
}

Batch Dataset::all() const {
    std::vector<std::size_t> ids(size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
    return batch(ids);
}

void Dataset::validate() const {
    if (labels.size() != size()) throw InvalidInput("Dataset: label count does not match rows");
    for (auto y : labels)
        if (y >= class_count) throw InvalidInput("Dataset: label out of range");
    if (noise_flags && noise_flags->size() != size()) throw InvalidInput("Dataset: noise flag count mismatch");
}

// ---------------------------------------------------------------------------

namespace {

Dataset make_points(const SyntheticSpec& spec, std::size_t n, const Tensor2& centers, Rng& rng) {
    Dataset d;
    d.class_count = spec.kind == SyntheticKind::TwoMoons ? 2 : spec.class_count;
    const std::size_t dim = spec.kind == SyntheticKind::TwoMoons ? 2 : spec.dim;
    d.features = Tensor2(n, dim);
    d.labels.resize(n);
    d.name = spec.kind == SyntheticKind::TwoMoons ? "moons" : "blobs";
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t y = i % d.class_count;
        d.labels[i] = y;
        if (spec.kind == SyntheticKind::Blobs) {
            for (std::size_t j = 0; j < dim; ++j) d.features(i, j) = rng.normal(centers(y, j), spec.cluster_std);
        } else {
            const double t = rng.uniform(0.0, std::numbers::pi);
            const double x0 = y == 0 ? std::cos(t) : 1.0 - std::cos(t);
            const double x1 = y == 0 ? std::sin(t) : 0.5 - std::sin(t);
            d.features(i, 0) = x0 + rng.normal(0.0, spec.moon_noise);
            d.features(i, 1) = x1 + rng.normal(0.0, spec.moon_noise);
        }
    }
    return d;
}

Tensor2 draw_centers(const SyntheticSpec& spec, Rng& rng) {
    if (spec.kind != SyntheticKind::Blobs) return {};
    Tensor2 c(spec.class_count, spec.dim);
    for (double& v : c.data) v = rng.uniform(-spec.center_box, spec.center_box);
    return c;
}

void check_spec(const SyntheticSpec& spec) {
    const std::size_t C = spec.kind == SyntheticKind::TwoMoons ? 2 : spec.class_count;
    if (C == 0) throw ConfigError("generate_synthetic: class_count must be positive");
    if (spec.n < C) throw ConfigError("generate_synthetic: n must be at least class_count");
    if (spec.kind == SyntheticKind::Blobs && spec.dim == 0) throw ConfigError("generate_synthetic: dim must be positive");
}

} // namespace

Dataset generate_synthetic(const SyntheticSpec& spec, Rng& rng) {
    check_spec(spec);
    Tensor2 centers = draw_centers(spec, rng);
    return make_points(spec, spec.n, centers, rng);
}

std::pair<Dataset, Dataset> generate_synthetic_split(const SyntheticSpec& spec, std::size_t n_test, Rng& rng) {
    check_spec(spec);
    Tensor2 centers = draw_centers(spec, rng);
    Dataset train = make_points(spec, spec.n, centers, rng);
    Dataset test = make_points(spec, n_test, centers, rng);
    test.name += "-test";
    return {std::move(train), std::move(test)};
}

// ---------------------------------------------------------------------------
// IDX

namespace {

std::vector<std::uint8_t> read_all(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<std::uint8_t>& b, std::size_t off, const std::string& path) {
    if (off + 4 > b.size()) throw FormatError(path + ": truncated header", off);
    return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) | (std::uint32_t{b[off + 2]} << 8) |
           std::uint32_t{b[off + 3]};
}

} // namespace

Dataset load_idx_subset(const std::string& images_path, const std::string& labels_path, std::size_t limit) {
    const auto img = read_all(images_path);
    const auto lab = read_all(labels_path);

    if (be32(img, 0, images_path) != 0x00000803u) throw FormatError(images_path + ": bad IDX image magic", 0);
    if (be32(lab, 0, labels_path) != 0x00000801u) throw FormatError(labels_path + ": bad IDX label magic", 0);

    const std::uint64_t n_img = be32(img, 4, images_path);
    const std::uint64_t rows = be32(img, 8, images_path);
    const std::uint64_t cols = be32(img, 12, images_path);
    const std::uint64_t n_lab = be32(lab, 4, labels_path);

    const std::uint64_t img_expected = 16 + n_img * rows * cols;
    if (img.size() != img_expected)
        throw FormatError(images_path + ": declared size " + std::to_string(img_expected) + " bytes, file has " +
                              std::to_string(img.size()),
                          std::min<std::uint64_t>(img.size(), img_expected));
    const std::uint64_t lab_expected = 8 + n_lab;
    if (lab.size() != lab_expected)
        throw FormatError(labels_path + ": declared size " + std::to_string(lab_expected) + " bytes, file has " +
                              std::to_string(lab.size()),
                          std::min<std::uint64_t>(lab.size(), lab_expected));
    if (n_img != n_lab) throw FormatError(labels_path + ": label count differs from image count", 4);

    const std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(limit, n_img));
    const std::size_t d = static_cast<std::size_t>(rows * cols);
    Dataset ds;
    ds.name = "idx";
    ds.features = Tensor2(n, d);
    ds.labels.resize(n);
    std::size_t max_label = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) ds.features(i, j) = img[16 + i * d + j] / 255.0;
        ds.labels[i] = lab[8 + i];
        max_label = std::max(max_label, ds.labels[i]);
    }
    ds.class_count = n == 0 ? 0 : max_label + 1;
    return ds;
}

// ---------------------------------------------------------------------------

Dataset inject_label_noise(Dataset dataset, double rate, Rng& rng) {
    if (!(rate >= 0.0 && rate <= 1.0)) throw ConfigError("inject_label_noise: rate must lie in [0, 1]");
    if (dataset.class_count < 2) throw ConfigError("inject_label_noise: need at least 2 classes");
    const std::size_t n = dataset.size();
    const auto k = static_cast<std::size_t>(std::floor(rate * static_cast<double>(n)));
    std::vector<bool> flags(n, false);
    for (std::size_t i : rng.sample_without_replacement(n, k)) {
        // Uniform over the C - 1 other classes.
        std::size_t y = rng.index(dataset.class_count - 1);
        if (y >= dataset.labels[i]) ++y;
        dataset.labels[i] = y;
        flags[i] = true;
    }
    dataset.noise_flags = std::move(flags);
    return dataset;
}

void standardize_features(Dataset& train, Dataset& test) {
    const std::size_t d = train.dim();
    if (test.dim() != d) throw InvalidInput("standardize_features: feature widths differ");
    if (train.size() == 0) return;
    const auto n = static_cast<double>(train.size());
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < train.size(); ++i) mean += train.features(i, j);
        mean /= n;
        double var = 0.0;
        for (std::size_t i = 0; i < train.size(); ++i) {
            const double c = train.features(i, j) - mean;
            var += c * c;
        }
        const double sd = std::sqrt(var / n);
        const double scale = sd > 0.0 ? 1.0 / sd : 1.0;
        for (auto* set : {&train, &test})
            for (std::size_t i = 0; i < set->size(); ++i) set->features(i, j) = (set->features(i, j) - mean) * scale;
    }
}

} // namespace swast
