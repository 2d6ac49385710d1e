#pragma once

#include <filesystem>

#include "mfgan/autodiff/mlp.hpp"

namespace mfgan::ad {

inline constexpr int kCheckpointVersion = 1;

/// Network architecture plus its parameters, as stored on disk.
struct Checkpoint {
  NetworkSpec spec;
  ParamVector params;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

/// Writes a text header
///
///     mfgan-checkpoint <version>
///     widths <w0> <w1> ...
///     activation <tag>
///     periodic <0|1> ...
///     extras <n>
///     count <n>
///     params
///
/// followed by `count` little-endian IEEE-754 doubles in row-major layer
/// order (W then b per layer, extras last).
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);

/// Reads a checkpoint written by write_checkpoint. Throws ParseError with
/// the section name and byte offset on malformed or truncated input.
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace mfgan::ad
