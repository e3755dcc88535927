// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>

namespace swast {

/// ceil(x) that treats values within 1e-9 (relative) of an integer as that
/// integer, so products like 300 * 0.1 / 2 land on 15 rather than 16.
inline std::size_t ceil_count(double x) {
    if (x <= 0.0) return 0;
    const double r = std::round(x);
    if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return static_cast<std::size_t>(r);
    return static_cast<std::size_t>(std::ceil(x));
}

} // namespace swast
