// SPDX-License-Identifier: Apache-2.0
#include "swast/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace swast {

bool Tensor2::all_finite() const {
    return std::all_of(data.begin(), data.end(), [](double v) { return std::isfinite(v); });
}

} // namespace swast
