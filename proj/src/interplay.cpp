// SPDX-License-Identifier: Apache-2.0
#include "swast/interplay.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "swast/errors.hpp"
#include "swast/pruning.hpp"

namespace swast {

double PolynomialFit::operator()(double x) const {
    double acc = 0.0;
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * x + *it;
    return acc;
}

double runge(double x) { return 1.0 / (1.0 + 25.0 * x * x); }

namespace {

std::vector<double> equally_spaced(std::size_t n) {
    std::vector<double> xs(n);
    if (n == 1) {
        xs[0] = 0.0;
        return xs;
    }
    for (std::size_t i = 0; i < n; ++i)
        xs[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    return xs;
}

} // namespace

std::vector<InterplaySample> sample_interplay(std::size_t n_points, double noisy_fraction, double noise_std,
                                              Rng& rng) {
    if (n_points < 2) throw InvalidInput("sample_interplay: need at least 2 points");
    if (!(noisy_fraction >= 0.0 && noisy_fraction <= 1.0)) throw InvalidInput("sample_interplay: fraction outside [0, 1]");
    if (!(noise_std >= 0.0)) throw InvalidInput("sample_interplay: negative noise_std");
    std::vector<InterplaySample> out;
    for (double x : equally_spaced(n_points)) out.push_back({x, runge(x), false});
    const auto k = static_cast<std::size_t>(std::llround(noisy_fraction * static_cast<double>(n_points)));
    for (std::size_t i : rng.sample_without_replacement(n_points, std::min(k, n_points))) {
        out[i].y += rng.normal(0.0, noise_std);
        out[i].is_noisy = true;
    }
    return out;
}

PolynomialFit polyfit_ls(const std::vector<InterplaySample>& samples, std::size_t degree) {
    if (samples.empty()) throw InvalidInput("polyfit_ls: no samples");
    const auto n = static_cast<Eigen::Index>(samples.size());
    const auto p = static_cast<Eigen::Index>(degree + 1);
    Eigen::MatrixXd V(n, p);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = samples[static_cast<std::size_t>(i)].x;
        double pw = 1.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            V(i, j) = pw;
            pw *= x;
        }
        y(i) = samples[static_cast<std::size_t>(i)].y;
    }
    Eigen::VectorXd c = V.completeOrthogonalDecomposition().solve(y);
    return {degree, std::vector<double>(c.data(), c.data() + c.size())};
}

double poly_mse(const PolynomialFit& fit, const std::vector<InterplaySample>& samples) {
    if (samples.empty()) throw InvalidInput("poly_mse: empty sample set");
    double acc = 0.0;
    for (const auto& s : samples) {
        const double r = fit(s.x) - s.y;
        acc += r * r;
    }
    return acc / static_cast<double>(samples.size());
}

std::vector<InterplaySample> runge_grid(std::size_t n) {
    std::vector<InterplaySample> out;
    for (double x : equally_spaced(n)) out.push_back({x, runge(x), false});
    return out;
}

PruneExperimentResult prune_experiment(const PruneExperimentConfig& cfg, Rng& rng) {
    if (cfg.k_zero > cfg.degree + 1) throw InvalidInput("prune_experiment: k_zero exceeds coefficient count");
    PruneExperimentResult r;
    r.samples = sample_interplay(cfg.n_points, cfg.noisy_fraction, cfg.noise_std, rng);
    std::vector<InterplaySample> clean;
    for (const auto& s : r.samples)
        if (!s.is_noisy) clean.push_back(s);
    if (clean.empty()) throw InvalidInput("prune_experiment: no clean samples");

    r.noisy_fit = polyfit_ls(r.samples, cfg.degree);
    r.clean_fit = polyfit_ls(clean, cfg.degree);
    r.noisy_pruned = {cfg.degree, magnitude_prune(r.noisy_fit.coefficients, cfg.k_zero)};
    r.clean_pruned = {cfg.degree, magnitude_prune(r.clean_fit.coefficients, cfg.k_zero)};

    const auto grid = runge_grid(cfg.grid_points);
    r.loss_noisyfit = poly_mse(r.noisy_fit, grid);
    r.loss_cleanfit = poly_mse(r.clean_fit, grid);
    r.loss_pruned_noisyfit = poly_mse(r.noisy_pruned, grid);
    r.loss_pruned_cleanfit = poly_mse(r.clean_pruned, grid);
    for (const auto& g : grid)
        r.curves.push_back({g.x, g.y, r.noisy_fit(g.x), r.noisy_pruned(g.x), r.clean_fit(g.x), r.clean_pruned(g.x)});
    return r;
}

// ---------------------------------------------------------------------------
// Discrepancy estimate. The search runs in the Chebyshev basis, where the
// Gram matrices stay well conditioned up to degree 20; candidates are
// converted to monomial coefficients only for reporting.

namespace {

Eigen::MatrixXd chebyshev_design(const std::vector<InterplaySample>& s, std::size_t degree) {
    const auto n = static_cast<Eigen::Index>(s.size());
    const auto p = static_cast<Eigen::Index>(degree + 1);
    Eigen::MatrixXd F(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = s[static_cast<std::size_t>(i)].x;
        F(i, 0) = 1.0;
        if (p > 1) F(i, 1) = x;
        for (Eigen::Index j = 2; j < p; ++j) F(i, j) = 2.0 * x * F(i, j - 1) - F(i, j - 2);
    }
    return F;
}

Eigen::VectorXd targets(const std::vector<InterplaySample>& s) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(s.size()));
    for (std::size_t i = 0; i < s.size(); ++i) y(static_cast<Eigen::Index>(i)) = s[i].y;
    return y;
}

std::vector<double> chebyshev_to_monomial(const Eigen::VectorXd& c) {
    const auto p = static_cast<std::size_t>(c.size());
    std::vector<double> out(p, 0.0);
    std::vector<double> prev(p, 0.0), cur(p, 0.0); // T_{j-1}, T_j in monomial form
    prev[0] = 1.0;
    if (p > 0) out[0] += c(0);
    if (p > 1) {
        cur[1] = 1.0;
        out[1] += c(1);
    }
    for (std::size_t j = 2; j < p; ++j) {
        std::vector<double> next(p, 0.0);
        for (std::size_t q = 0; q + 1 < p; ++q) next[q + 1] += 2.0 * cur[q];
        for (std::size_t q = 0; q < p; ++q) next[q] -= prev[q];
        for (std::size_t q = 0; q < p; ++q) out[q] += c(static_cast<Eigen::Index>(j)) * next[q];
        prev = std::move(cur);
        cur = std::move(next);
    }
    return out;
}

struct Objective {
    Eigen::MatrixXd F, Fh;
    Eigen::VectorXd y, yh;
    double floor = 1e-12;

    static double mse(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
        return (A * c - b).squaredNorm() / static_cast<double>(A.rows());
    }

    struct Value {
        double ratio;
        bool floored;
    };

    Value operator()(const Eigen::VectorXd& c) const {
        const double L = mse(F, y, c);
        const double Lh = mse(Fh, yh, c);
        if (!std::isfinite(L) || !std::isfinite(Lh)) return {0.0, false};
        const bool floored = L < floor;
        return {std::abs(L - Lh) / std::max(L, floor), floored};
    }

    Eigen::VectorXd gradient(const Eigen::VectorXd& c) const {
        const Eigen::VectorXd rD = F * c - y;
        const Eigen::VectorXd rH = Fh * c - yh;
        const double L = rD.squaredNorm() / static_cast<double>(F.rows());
        const double Lh = rH.squaredNorm() / static_cast<double>(Fh.rows());
        const Eigen::VectorXd gL = 2.0 / static_cast<double>(F.rows()) * (F.transpose() * rD);
        const Eigen::VectorXd gLh = 2.0 / static_cast<double>(Fh.rows()) * (Fh.transpose() * rH);
        const double Lc = std::max(L, floor);
        const double s = L - Lh >= 0.0 ? 1.0 : -1.0;
        // d/dc of s (L - Lh) / L
        return s * ((gL - gLh) * Lc - (L - Lh) * gL) / (Lc * Lc);
    }
};

Eigen::VectorXd ls_cheb(const Eigen::MatrixXd& F, const Eigen::VectorXd& y) {
    return F.completeOrthogonalDecomposition().solve(y);
}

} // namespace

IddEstimate estimate_idd(const std::vector<InterplaySample>& D, const std::vector<InterplaySample>& D_hat,
                         std::size_t degree, const IddOptions& opts, EventLog* events) {
    if (D.empty() || D_hat.empty()) throw InvalidInput("estimate_idd: empty sample set");
    if (!(opts.denominator_floor > 0.0)) throw InvalidInput("estimate_idd: floor must be positive");
    Objective obj{chebyshev_design(D, degree), chebyshev_design(D_hat, degree), targets(D), targets(D_hat),
                  opts.denominator_floor};
    const auto p = static_cast<Eigen::Index>(degree + 1);

    IddEstimate best;
    Eigen::VectorXd best_c = Eigen::VectorXd::Zero(p);
    bool have = false;
    auto consider = [&](const Eigen::VectorXd& c) {
        const auto v = obj(c);
        if (v.floored) best.floor_activated = true;
        if (!have || v.ratio > best.value) {
            best.value = v.ratio;
            best_c = c;
            have = true;
        }
        return v.ratio;
    };

    const Eigen::VectorXd c_D = ls_cheb(obj.F, obj.y);
    const Eigen::VectorXd c_H = ls_cheb(obj.Fh, obj.yh);
    consider(c_D);
    consider(c_H);

    // Preconditioner: inverse Gram matrix of D (ridge-stabilised).
    Eigen::MatrixXd A = obj.F.transpose() * obj.F / static_cast<double>(obj.F.rows());
    const double eps = 1e-10 * std::max(1.0, A.trace() / static_cast<double>(p));
    A.diagonal().array() += eps;
    const Eigen::LDLT<Eigen::MatrixXd> pre(A);
    auto a_norm = [&](const Eigen::VectorXd& v) { return std::sqrt(std::max(0.0, v.dot(A * v))); };

    for (std::size_t r = 0; r < opts.restarts; ++r) {
        Rng rng(mix_seed(opts.seed, r));
        Eigen::VectorXd c = c_D;
        const double scale = std::pow(10.0, rng.uniform(-3.0, 1.0));
        for (Eigen::Index j = 0; j < p; ++j) c(j) += scale * rng.normal();
        double cur = consider(c);
        double eta = 0.1;
        for (std::size_t it = 0; it < opts.steps; ++it) {
            const Eigen::VectorXd g = obj.gradient(c);
            const Eigen::VectorXd d = pre.solve(g);
            const double dn = a_norm(d);
            if (!(dn > 0.0) || !std::isfinite(dn)) break;
            const Eigen::VectorXd trial = c + (eta * std::max(1.0, a_norm(c)) / dn) * d;
            const double v = consider(trial);
            if (v > cur) {
                c = trial;
                cur = v;
                eta = std::min(eta * 2.0, 1e6);
            } else {
                eta *= 0.5;
                if (eta < 1e-12) break;
            }
        }
    }

    best.argmax = chebyshev_to_monomial(best_c);
    if (best.floor_activated && events)
        events->push_back({"denominator_floor", "L fell below " + std::to_string(opts.denominator_floor) +
                                                    " at degree " + std::to_string(degree)});
    return best;
}

std::vector<IddRow> idd_sweep(const IddSweepConfig& cfg, Rng& rng, EventLog* events) {
    if (cfg.min_degree > cfg.max_degree) throw InvalidInput("idd_sweep: empty degree range");
    if (cfg.n_noisy < 2 || cfg.n_clean < 2) throw InvalidInput("idd_sweep: need at least 2 points per set");
    const auto noisy = sample_interplay(cfg.n_noisy, 1.0, cfg.noise_std, rng);
    const auto clean = sample_interplay(cfg.n_clean, 0.0, 0.0, rng);
    const auto D = cfg.basis == IddLossBasis::Dataset ? noisy : runge_grid(cfg.test_points);
    const std::uint64_t search_seed = mix_seed(cfg.idd.seed, rng.next_u64());
    std::vector<IddRow> rows;
    for (std::size_t k = cfg.min_degree; k <= cfg.max_degree; ++k) {
        IddOptions o = cfg.idd;
        o.seed = mix_seed(search_seed, k);
        const auto est = estimate_idd(D, clean, k, o, events);
        rows.push_back({k, est.value, est.floor_activated});
    }
    return rows;
}

} // namespace swast
