#pragma once

#include <filesystem>

#include "uis/core.hpp"

namespace uis {

/// 8-bit PNG, gray or RGB (alpha and palettes are flattened by libpng).
/// Values map linearly to [0, 1].
SignalVector read_png(const std::filesystem::path& path);
/// Clips to [0, 1] and rounds to 8 bits. Needs 1 or 3 channels.
void write_png(const std::filesystem::path& path, const SignalVector& image);

/// Lossless float32 file with the same layout as a wire frame.
SignalVector read_raw(const std::filesystem::path& path);
void write_raw(const std::filesystem::path& path, const SignalVector& image);

/// Dispatches on extension: .png, otherwise raw.
SignalVector read_image(const std::filesystem::path& path);

}  // namespace uis
