// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "swast/tensor.hpp"

namespace swast::testing {

using Vec = std::vector<double>;

inline Vec solve_gauss(std::vector<Vec> A, Vec b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
        std::swap(A[c], A[piv]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = A[r][c] / A[c][c];
            for (std::size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
            b[r] -= f * b[c];
        }
    }
    Vec x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= A[i][k] * x[k];
        x[i] = s / A[i][i];
    }
    return x;
}

inline double dot(const Vec& a, const Vec& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline Vec ridge(const std::vector<Vec>& rows, const std::vector<std::size_t>& sel, const Vec& target, double l2) {
    const std::size_t k = sel.size();
    std::vector<Vec> K(k, Vec(k));
    Vec rhs(k);
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) K[a][b] = dot(rows[sel[a]], rows[sel[b]]) + (a == b ? l2 : 0.0);
        rhs[a] = dot(rows[sel[a]], target);
    }
    return solve_gauss(K, rhs);
}

inline Vec residual(const std::vector<Vec>& rows, const std::vector<std::size_t>& sel, const Vec& w, const Vec& target) {
    Vec r = target;
    for (std::size_t j = 0; j < sel.size(); ++j)
        for (std::size_t c = 0; c < r.size(); ++c) r[c] -= w[j] * rows[sel[j]][c];
    return r;
}

// Reference OMP: exhaustive argmax scan per step, ridge via Gaussian
// elimination, repeated refit on the positive-weight subset, reject refits that raise
// the residual norm.
inline std::vector<std::size_t> reference_omp_picks(const std::vector<Vec>& rows, std::size_t budget, double l2) {
    const std::size_t n = rows.size(), p = rows[0].size();
    Vec target(p, 0.0);
    for (const auto& r : rows)
        for (std::size_t c = 0; c < p; ++c) target[c] += r[c] / static_cast<double>(n);
    std::vector<std::size_t> sel;
    Vec w, res = target;
    std::vector<bool> taken(n, false);
    while (sel.size() < budget && std::sqrt(dot(res, res)) > 1e-8) {
        std::size_t best = n;
        double best_val = -1;
        for (std::size_t i = 0; i < n; ++i) {
            if (taken[i]) continue;
            const double v = std::abs(dot(rows[i], res));
            if (v > best_val) {
                best_val = v;
                best = i;
            }
        }
        if (best_val == 0.0) break;
        taken[best] = true;
        sel.push_back(best);
        // Refit on the positive-weight subset until no weight is non-positive.
        std::vector<std::size_t> pos(sel.size());
        std::iota(pos.begin(), pos.end(), std::size_t{0});
        Vec nw(sel.size(), 0.0);
        while (!pos.empty()) {
            std::vector<std::size_t> sub;
            for (auto j : pos) sub.push_back(sel[j]);
            Vec ws = ridge(rows, sub, target, l2);
            std::vector<std::size_t> keep;
            for (std::size_t j = 0; j < pos.size(); ++j)
                if (ws[j] > 0) keep.push_back(pos[j]);
            if (keep.size() == pos.size()) {
                for (std::size_t j = 0; j < pos.size(); ++j) nw[pos[j]] = ws[j];
                break;
            }
            pos = keep;
        }
        Vec nr = residual(rows, sel, nw, target);
        if (dot(nr, nr) > dot(res, res)) {
            nw = w;
            nw.push_back(0.0);
            nr = res;
        }
        w = nw;
        res = nr;
    }
    return sel;
}

inline Tensor2 to_tensor(const std::vector<Vec>& rows) {
    Tensor2 t(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[0].size(); ++j) t(i, j) = rows[i][j];
    return t;
}

} // namespace swast::testing
