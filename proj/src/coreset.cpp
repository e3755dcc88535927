// SPDX-License-Identifier: Apache-2.0
#include "swast/coreset.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "swast/errors.hpp"
#include "swast/network.hpp"
#include "swast/numeric.hpp"
#include "swast/ops.hpp"

namespace swast {

CoresetState CoresetState::full(std::size_t n) {
    CoresetState c;
    c.indices.resize(n);
    std::iota(c.indices.begin(), c.indices.end(), std::size_t{0});
    c.weights.assign(n, 1.0);
    c.alpha = 1.0;
    return c;
}

std::size_t coreset_budget(double alpha, std::size_t n) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidInput("coreset ratio must lie in (0, 1]");
    return ceil_count(alpha * static_cast<double>(n));
}

std::vector<std::size_t> class_budgets(const std::vector<std::size_t>& labels, std::size_t class_count,
                                       std::size_t budget) {
    std::vector<std::size_t> counts(class_count, 0);
    for (auto y : labels) {
        if (y >= class_count) throw InvalidInput("class_budgets: label out of range");
        ++counts[y];
    }
    const double n = static_cast<double>(labels.size());
    std::vector<std::size_t> out(class_count, 0);
    if (labels.empty()) return out;
    budget = std::min(budget, labels.size());

    std::vector<double> frac(class_count, 0.0);
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < class_count; ++c) {
        const double quota = static_cast<double>(budget) * static_cast<double>(counts[c]) / n;
        out[c] = std::min(counts[c], static_cast<std::size_t>(std::floor(quota)));
        frac[c] = quota - std::floor(quota);
        assigned += out[c];
    }
    std::vector<std::size_t> order(class_count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
    for (std::size_t j = 0; assigned < budget && j < order.size(); ++j) {
        const std::size_t c = order[j];
        if (out[c] < counts[c]) {
            ++out[c];
            ++assigned;
        }
    }
    return out;
}

namespace {

std::size_t infer_class_count(const std::vector<std::size_t>& classes) {
    return classes.empty() ? 0 : *std::max_element(classes.begin(), classes.end()) + 1;
}

CoresetState unit_weight_state(std::vector<std::size_t> ids, double alpha) {
    std::sort(ids.begin(), ids.end());
    CoresetState c;
    c.weights.assign(ids.size(), 1.0);
    c.indices = std::move(ids);
    c.alpha = alpha;
    return c;
}

// Per class: rank members by `key` ascending (stable over index order) and
// keep the class budget from the front.
template <class Key>
CoresetState take_per_class(const std::vector<std::size_t>& classes, std::size_t class_count, double alpha, Key key) {
    const std::size_t budget = coreset_budget(alpha, classes.size());
    const auto budgets = class_budgets(classes, class_count, budget);
    std::vector<std::vector<std::size_t>> members(class_count);
    for (std::size_t i = 0; i < classes.size(); ++i) members[classes[i]].push_back(i);
    std::vector<std::size_t> picked;
    for (std::size_t c = 0; c < class_count; ++c) {
        auto& m = members[c];
        std::stable_sort(m.begin(), m.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
        picked.insert(picked.end(), m.begin(), m.begin() + static_cast<std::ptrdiff_t>(budgets[c]));
    }
    return unit_weight_state(std::move(picked), alpha);
}

} // namespace

// ---------------------------------------------------------------------------
// EL2N

ScoreTable el2n_score(const SparseModel& model, const Dataset& data) {
    if (model.output_width() != data.class_count) throw InvalidInput("el2n_score: model width does not match classes");
    auto logits = forward(model, data.features).logits;
    ScoreTable t;
    t.scores.resize(data.size());
    t.classes = data.labels;
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto p = softmax(logits.row(i));
        double s = 0.0;
        for (std::size_t c = 0; c < p.size(); ++c) {
            const double d = p[c] - (c == data.labels[i] ? 1.0 : 0.0);
            s += d * d;
        }
        t.scores[i] = s;
    }
    return t;
}

CoresetState el2n_select(const ScoreTable& scores, double alpha, std::size_t epoch, std::size_t total_epochs) {
    const bool late = 2 * epoch >= total_epochs;
    const auto& s = scores.scores;
    return take_per_class(scores.classes, infer_class_count(scores.classes), alpha,
                          [&](std::size_t i) { return late ? s[i] : -s[i]; });
}

// ---------------------------------------------------------------------------
// Moderate

ScoreTable moderate_scores(const Tensor2& emb, const std::vector<std::size_t>& labels, std::size_t class_count) {
    if (labels.size() != emb.rows) throw InvalidInput("moderate_scores: label count mismatch");
    Tensor2 centers(class_count, emb.cols);
    std::vector<std::size_t> counts(class_count, 0);
    for (std::size_t i = 0; i < emb.rows; ++i) {
        if (labels[i] >= class_count) throw InvalidInput("moderate_scores: label out of range");
        ++counts[labels[i]];
        for (std::size_t j = 0; j < emb.cols; ++j) centers(labels[i], j) += emb(i, j);
    }
    for (std::size_t c = 0; c < class_count; ++c)
        if (counts[c])
            for (std::size_t j = 0; j < emb.cols; ++j) centers(c, j) /= static_cast<double>(counts[c]);

    ScoreTable t;
    t.classes = labels;
    t.scores.resize(emb.rows);
    for (std::size_t i = 0; i < emb.rows; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < emb.cols; ++j) {
            const double d = emb(i, j) - centers(labels[i], j);
            s += d * d;
        }
        t.scores[i] = std::sqrt(s);
    }
    return t;
}

CoresetState moderate_select_scores(const ScoreTable& scores, std::size_t class_count, double alpha) {
    std::vector<double> median(class_count, 0.0);
    for (std::size_t c = 0; c < class_count; ++c) {
        std::vector<double> v;
        for (std::size_t i = 0; i < scores.scores.size(); ++i)
            if (scores.classes[i] == c) v.push_back(scores.scores[i]);
        if (v.empty()) continue;
        std::sort(v.begin(), v.end());
        const std::size_t m = v.size() / 2;
        median[c] = v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
    }
    return take_per_class(scores.classes, class_count, alpha, [&](std::size_t i) {
        return std::abs(scores.scores[i] - median[scores.classes[i]]);
    });
}

CoresetState moderate_select(const SparseModel& model, const Dataset& data, double alpha) {
    if (model.layer_count() < 2) throw InvalidInput("moderate_select: model has no hidden layer to embed with");
    auto fwd = forward(model, data.features);
    return moderate_select_scores(moderate_scores(fwd.cache.embedding(), data.labels, data.class_count),
                                  data.class_count, alpha);
}

// ---------------------------------------------------------------------------
// Gradient matching

Tensor2 per_sample_grads(const SparseModel& model, const Dataset& data) {
    auto fwd = forward(model, data.features);
    const Tensor2& emb = fwd.cache.embedding();
    const std::size_t C = model.output_width(), H = emb.cols;
    Tensor2 G(data.size(), C * H + C);
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.labels[i] >= C) throw InvalidInput("per_sample_grads: label out of range");
        auto p = softmax(fwd.logits.row(i));
        auto row = G.row(i);
        for (std::size_t o = 0; o < C; ++o) {
            const double delta = p[o] - (o == data.labels[i] ? 1.0 : 0.0);
            for (std::size_t j = 0; j < H; ++j) row[o * H + j] = delta * emb(i, j);
            row[C * H + o] = delta;
        }
    }
    return G;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Ridge least squares min ||S^T w - target||^2 + l2 ||w||^2 over the rows of
// G listed in `rows`.
VectorXd ridge_fit(const MatrixXd& G, const std::vector<std::size_t>& rows, const VectorXd& target, double l2) {
    const auto k = static_cast<Eigen::Index>(rows.size());
    MatrixXd St(G.cols(), k);
    for (Eigen::Index j = 0; j < k; ++j) St.col(j) = G.row(static_cast<Eigen::Index>(rows[j])).transpose();
    if (l2 > 0.0) {
        MatrixXd K = St.transpose() * St;
        K.diagonal().array() += l2;
        return K.ldlt().solve(St.transpose() * target);
    }
    return St.completeOrthogonalDecomposition().solve(target);
}

VectorXd nonneg_refit(const MatrixXd& G, const std::vector<std::size_t>& rows, const VectorXd& target, double l2) {
    // Drop non-positive weights and refit on the survivors until every
    // remaining weight is positive. The support shrinks each round.
    std::vector<std::size_t> support(rows.size());
    std::iota(support.begin(), support.end(), std::size_t{0});
    VectorXd out = VectorXd::Zero(static_cast<Eigen::Index>(rows.size()));
    while (!support.empty()) {
        std::vector<std::size_t> sub;
        for (auto j : support) sub.push_back(rows[j]);
        const VectorXd ws = ridge_fit(G, sub, target, l2);
        std::vector<std::size_t> kept;
        for (std::size_t j = 0; j < support.size(); ++j)
            if (ws[static_cast<Eigen::Index>(j)] > 0.0) kept.push_back(support[j]);
        if (kept.size() == support.size()) {
            for (std::size_t j = 0; j < support.size(); ++j)
                out[static_cast<Eigen::Index>(support[j])] = ws[static_cast<Eigen::Index>(j)];
            break;
        }
        support = std::move(kept);
    }
    return out;
}

VectorXd residual_of(const MatrixXd& G, const std::vector<std::size_t>& rows, const VectorXd& w,
                     const VectorXd& target) {
    VectorXd r = target;
    for (std::size_t j = 0; j < rows.size(); ++j)
        r -= w[static_cast<Eigen::Index>(j)] * G.row(static_cast<Eigen::Index>(rows[j])).transpose();
    return r;
}

struct OmpPick {
    std::vector<std::size_t> rows; // local row ids, selection order
    std::vector<double> weights;
};

OmpPick omp_core(const MatrixXd& G, std::size_t budget, double l2, double tol, OmpTrace* trace, EventLog* events) {
    OmpPick out;
    const Eigen::Index N = G.rows();
    if (N == 0 || budget == 0) return out;
    budget = std::min<std::size_t>(budget, static_cast<std::size_t>(N));

    VectorXd target = VectorXd::Zero(G.cols());
    for (Eigen::Index i = 0; i < N; ++i) target += G.row(i).transpose();
    target /= static_cast<double>(N);

    if (G.isZero(0.0)) {
        for (std::size_t i = 0; i < budget; ++i) {
            out.rows.push_back(i);
            out.weights.push_back(0.0);
        }
        if (events) events->push_back({"degenerate_selection", "all per-sample gradients are zero"});
        return out;
    }

    std::vector<bool> taken(static_cast<std::size_t>(N), false);
    VectorXd w;
    VectorXd r = target;
    double rnorm = r.norm();
    while (out.rows.size() < budget && rnorm > tol) {
        const VectorXd corr = G * r;
        Eigen::Index best = -1;
        double best_val = 0.0;
        for (Eigen::Index i = 0; i < N; ++i) {
            if (taken[static_cast<std::size_t>(i)]) continue;
            const double v = std::abs(corr[i]);
            if (best < 0 || v > best_val) {
                best = i;
                best_val = v;
            }
        }
        if (best < 0 || best_val == 0.0) break;
        taken[static_cast<std::size_t>(best)] = true;
        out.rows.push_back(static_cast<std::size_t>(best));

        VectorXd w_new = nonneg_refit(G, out.rows, target, l2);
        VectorXd r_new = residual_of(G, out.rows, w_new, target);
        if (r_new.norm() > rnorm) {
            // Keep the previous fit; the new row enters with weight 0.
            w_new = VectorXd::Zero(static_cast<Eigen::Index>(out.rows.size()));
            w_new.head(w.size()) = w;
            r_new = r;
        }
        w = std::move(w_new);
        r = std::move(r_new);
        rnorm = r.norm();
        if (trace) {
            trace->picks.push_back(static_cast<std::size_t>(best));
            trace->residual_norms.push_back(rnorm);
        }
    }
    out.weights.assign(w.data(), w.data() + w.size());
    return out;
}

MatrixXd to_eigen(const Tensor2& t) {
    MatrixXd m(static_cast<Eigen::Index>(t.rows), static_cast<Eigen::Index>(t.cols));
    for (std::size_t i = 0; i < t.rows; ++i)
        for (std::size_t j = 0; j < t.cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = t(i, j);
    return m;
}

CoresetState sorted_state(std::vector<std::size_t> ids, std::vector<double> weights, double alpha) {
    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
    CoresetState c;
    c.alpha = alpha;
    for (auto j : order) {
        c.indices.push_back(ids[j]);
        c.weights.push_back(weights[j]);
    }
    return c;
}

} // namespace

CoresetState omp_gradmatch(const Tensor2& G, double alpha, double l2_reg, double tol, OmpTrace* trace,
                           EventLog* events) {
    const std::size_t budget = coreset_budget(alpha, G.rows);
    if (G.rows > 0 && budget < 1) throw InvalidInput("omp_gradmatch: empty budget");
    auto pick = omp_core(to_eigen(G), budget, l2_reg, tol, trace, events);
    return sorted_state(std::move(pick.rows), std::move(pick.weights), alpha);
}

CoresetState gradmatch_select(const SparseModel& model, const Dataset& data, double alpha, const OmpOptions& opts,
                              EventLog* events) {
    Tensor2 G = per_sample_grads(model, data);
    if (!opts.per_class) return omp_gradmatch(G, alpha, opts.l2_reg, opts.tol, nullptr, events);

    const auto budgets = class_budgets(data.labels, data.class_count, coreset_budget(alpha, data.size()));
    std::vector<std::size_t> ids;
    std::vector<double> weights;
    for (std::size_t c = 0; c < data.class_count; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < data.size(); ++i)
            if (data.labels[i] == c) members.push_back(i);
        if (members.empty() || budgets[c] == 0) continue;
        MatrixXd Gc(static_cast<Eigen::Index>(members.size()), static_cast<Eigen::Index>(G.cols));
        for (std::size_t r = 0; r < members.size(); ++r)
            for (std::size_t j = 0; j < G.cols; ++j)
                Gc(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = G(members[r], j);
        auto pick = omp_core(Gc, budgets[c], opts.l2_reg, opts.tol, nullptr, events);
        for (std::size_t j = 0; j < pick.rows.size(); ++j) {
            ids.push_back(members[pick.rows[j]]);
            weights.push_back(pick.weights[j]);
        }
    }
    return sorted_state(std::move(ids), std::move(weights), alpha);
}

double noise_fraction(const CoresetState& coreset, const std::vector<bool>& noise_flags) {
    if (coreset.indices.empty()) return 0.0;
    std::size_t noisy = 0;
    for (auto i : coreset.indices) {
        if (i >= noise_flags.size()) throw InvalidInput("noise_fraction: flags do not cover the coreset");
        if (noise_flags[i]) ++noisy;
    }
    return static_cast<double>(noisy) / static_cast<double>(coreset.indices.size());
}

} // namespace swast
