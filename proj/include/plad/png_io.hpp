#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "plad/image.hpp"

namespace plad {

/// Decodes an 8-bit grayscale/RGB PNG (alpha dropped). Grayscale input is
/// replicated to three channels so every image takes the same feature path.
/// Throws DecodeError (with byte offset) on malformed input and
/// Error{UnsupportedFormat} on anything other than 8-bit gray/RGB.
ImageTensor decode_png(std::span<const std::uint8_t> bytes);

/// Encodes to 8-bit PNG, one or three channels; v -> round(v * 255).
std::vector<std::uint8_t> encode_png(const ImageTensor& img);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

ImageTensor read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const ImageTensor& img);

}  // namespace plad
