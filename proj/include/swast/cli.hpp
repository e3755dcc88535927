// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace swast {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDivergence = 3;

/// Entry point of the `swast` tool: train | interplay | ablate | gradcheck | inspect.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace swast
