// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "swast/engine.hpp"

namespace swast {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// On-disk layout (all integers little-endian):
//
//   "SWST" | u32 version | payload | u32 CRC32(payload)
//
// payload is a sequence of sections, each a u64 byte length followed by the
// section body, in this order:
//
//   model      u32 layers, u8 scope, then per layer u64 out, u64 in,
//              out*in f64 weights, out f64 biases, ceil(out*in/8) mask bytes
//              (8 entries per byte, LSB first)
//   optimizer  per layer out*in f64 weight momentum, out f64 bias momentum
//   coreset    f64 alpha, u64 count, count u64 indices, count f64 weights
//   preserved  u8 present, u64 count, per entry u64 id, u64 len, len f64
//   rng        engine state as text bytes
//   counters   u64 epoch, u64 step
struct Checkpoint {
    std::uint32_t version = kCheckpointVersion;
    TrainingState state;

    bool operator==(const Checkpoint&) const = default;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);

/// Throws FormatError, UnsupportedVersion or CorruptionError.
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

/// Atomic: writes a temporary file and renames it over `path`.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

/// Writes `bytes` to `path` through a temporary file and rename.
void write_file_atomic(const std::string& path, const std::string& bytes);

} // namespace swast
