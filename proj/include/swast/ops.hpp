// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace swast {

/// Floor applied to probabilities before taking logs in CE and KL.
inline constexpr double kProbFloor = 1e-12;

/// Max-shifted softmax. Throws InvalidInput on empty or non-finite logits.
std::vector<double> softmax(std::span<const double> logits);

double log_sum_exp(std::span<const double> logits);

/// -log(max(probs[label], kProbFloor)).
double cross_entropy(std::span<const double> probs, std::size_t label);

/// KL(p || q) with q floored at kProbFloor and 0 * log 0 := 0.
///
/// Each term is p_i * (log p_i - log q_i), so identical inputs cancel term by
/// term and give exactly 0.
double kl_divergence(std::span<const double> p, std::span<const double> q);

} // namespace swast
