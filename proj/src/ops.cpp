// SPDX-License-Identifier: Apache-2.0
#include "swast/ops.hpp"

#include <algorithm>
#include <cmath>

#include "swast/errors.hpp"

namespace swast {

namespace {

void require_finite(std::span<const double> v, const char* who) {
    if (v.empty()) throw InvalidInput(std::string(who) + ": empty input");
    for (double x : v)
        if (!std::isfinite(x)) throw InvalidInput(std::string(who) + ": non-finite input");
}

} // namespace

std::vector<double> softmax(std::span<const double> logits) {
    require_finite(logits, "softmax");
    const double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - m);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

double log_sum_exp(std::span<const double> logits) {
    require_finite(logits, "log_sum_exp");
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - m);
    return m + std::log(sum);
}

double cross_entropy(std::span<const double> probs, std::size_t label) {
    if (label >= probs.size()) throw InvalidInput("cross_entropy: label out of range");
    return -std::log(std::max(probs[label], kProbFloor));
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw InvalidInput("kl_divergence: length mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0 || p[i] == q[i]) continue;
        sum += p[i] * (std::log(p[i]) - std::log(std::max(q[i], kProbFloor)));
    }
    return sum;
}

} // namespace swast
