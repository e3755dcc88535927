// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace swast {

// Diagnostic events raised by recoverable conditions (clamped RigL updates,
// fallback coresets, floored denominators, divergence).
struct Event {
    std::string kind;
    std::string detail;
};

using EventLog = std::vector<Event>;

inline bool has_event(const EventLog& log, const std::string& kind) {
    for (const auto& e : log)
        if (e.kind == kind) return true;
    return false;
}

} // namespace swast
