// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace swast {

/// Argument violates an operation's precondition (shape, range, finiteness).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Object used out of order, e.g. a forward cache from an older model revision.
class InvalidState : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Bad configuration value or schema violation. The CLI maps this to exit 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss. The CLI maps this to exit 3.
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed binary input; carries the byte offset where parsing failed.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::uint64_t offset)
        : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

class UnsupportedVersion : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CorruptionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace swast
